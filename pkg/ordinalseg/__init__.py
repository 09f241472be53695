from .__version__ import __version__

__all__ = ["__version__", "main"]


def main():
    import sys

    from .app import OrdSegApp

    app = OrdSegApp(output=sys.stdout)
    result = app(cli_args=sys.argv[1:])
    if result:
        raise SystemExit(result)
