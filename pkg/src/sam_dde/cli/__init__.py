"""
Command-line interface
"""

from .main import build_parser, main
from .models import RunConfig, parse_omega, parse_omega_list

__all__ = ["RunConfig", "build_parser", "main", "parse_omega", "parse_omega_list"]
