import sys


def _run(command, argv):
    from orbitlab.conf import configure
    configure()

    import django
    django.setup()

    from django.core.management import call_command
    from django.core.management.base import CommandError

    argv = sys.argv[1:] if argv is None else argv
    try:
        call_command(command, *argv)
    except CommandError as e:
        sys.stderr.write('CommandError: {0}\n'.format(e))
        return e.returncode
    return 0


def main(argv=None):
    """
    Console entry point: ``orbitlab <scenario> [options]`` runs the orbitlab management command.
    """
    return _run('orbitlab', argv)


def pilot(argv=None):
    """
    Console entry point for ``orbitlab-pilot [--out DIR] [--seed N] [--dry-run]``.
    """
    return _run('orbitlab_pilot', argv)


if __name__ == '__main__':
    sys.exit(main())
