import sys

from rich.console import Console
from rich.text import Text

from imitab.config import load_config
from imitab.exceptions import ImitabException
from imitab.utils.cli import COMMANDS, parse_cli_args
from imitab.utils.logs import setup_logging


def main():
    try:
        args = parse_cli_args()
        app_config = load_config(args.config)
        setup_logging(args.log_level or app_config.log_level)
        return sys.exit(COMMANDS[args.command](args, app_config))

    except (Exception, ImitabException) as e:
        console = Console()
        if isinstance(e, ImitabException):
            console.print(Text(str(e), style="bold red"))
        else:
            console.print_exception()
        sys.exit(-1)


if __name__ == "__main__":
    main()
