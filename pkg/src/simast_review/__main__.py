"""Allow ``python -m simast_review``."""

from simast_review.cli import run


if __name__ == "__main__":
    run()
