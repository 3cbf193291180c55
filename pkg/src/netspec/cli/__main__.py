"""
Main entry point for CLI package.
"""

from . import app

if __name__ == "__main__":
    app()
