#!/usr/bin/env python
"""
macsense command line: capacity-distortion regions and frontiers for the
state-sensing multiple-access channel.

    python manage.py evaluate_region | trace_frontier | verify_fme | simulate [options]
"""
import os
import sys


def main():
    """Dispatch to a macsense management command."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'macsense.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "macsense runs its commands through Django, which is not importable. "
            "Install the pinned stack with 'pip install -r requirements.txt'."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
