"""Entry point for running tccp as a module."""

from .cli import main

if __name__ == "__main__":
    main()
