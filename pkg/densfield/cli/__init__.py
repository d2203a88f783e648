"""Command line entry point"""
from densfield.cli.main import run, main, build_parser
