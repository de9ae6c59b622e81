"""
Command-line interface.

- config.py - validated run documents (TOML/JSON or flags)
- main.py - argparse subcommands and exit codes
"""
