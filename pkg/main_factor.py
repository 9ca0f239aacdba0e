# main_factor.py
import sys

from regulator_factor_core.cli import cli_dispatch


def main():
    sys.exit(cli_dispatch(sys.argv[1:]))

if __name__ == "__main__":
    main()
