"""``python -m reports.cli <command> ...``

Runs the same management commands as ``manage.py`` but with fixed exit
codes: 0 on success, 1 for usage or configuration errors, 2 for data errors.
"""
import os
import sys

COMMANDS = ('study', 'simulate', 'power', 'compare')

USAGE = f"usage: eventstudy {{{','.join(COMMANDS)}}} [options]\n" \
        "Run 'eventstudy <command> --help' for the options of a command.\n"


def main(argv=None):
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'eventstudy.settings')
    import django
    django.setup()

    from django.core.management import load_command_class
    from django.core.management.base import CommandError

    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ('-h', '--help'):
        (sys.stdout if argv else sys.stderr).write(USAGE)
        return 0 if argv else 1
    name, rest = argv[0], argv[1:]
    if name not in COMMANDS:
        sys.stderr.write(f'Unknown command: {name!r}\n{USAGE}')
        return 1

    command = load_command_class('reports', name)
    # Usage errors print the usage text and raise SystemExit instead of CommandError
    command._called_from_command_line = True
    parser = command.create_parser('eventstudy', name)
    try:
        options = parser.parse_args(rest)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    cmd_options = vars(options)
    args = cmd_options.pop('args', ())
    try:
        command.execute(*args, **cmd_options)
    except CommandError as exc:
        command.stderr.write(f'{exc}')
        return exc.returncode
    return 0


if __name__ == '__main__':
    sys.exit(main())
