"""Allow ``python -m evornn --config ...``."""

from .cli import main

if __name__ == "__main__":
    main()
