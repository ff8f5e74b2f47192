import sys

from cli import run
from config import logger


def main():
    try:
        sys.exit(run(sys.argv[1:]))
    except KeyboardInterrupt:
        logger.warning("Stopped by user")
        sys.exit(130)


if __name__ == "__main__":
    main()
