import json
import sys
from importlib import resources

from pygments import formatters, highlight, lexers


def print_json(result, color: bool = True, stream=None):
    """
    Prints a JSON-able value, colored when writing to a terminal.

    :param result: Value to print
    :param color: Allow colors; ignored when the stream is not a TTY
    :type color: bool
    """
    stream = stream or sys.stdout
    formatted_json = json.dumps(result, indent=2)
    if color and stream.isatty():
        stream.write(highlight(formatted_json, lexers.JsonLexer(), formatters.TerminalFormatter()))
    else:
        stream.write(formatted_json + "\n")


def read_file(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def write_file(path: str, text: str):
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)


def asset_path(name: str) -> str:
    """Path of a file bundled in ``rbnet/assets``."""
    return str(resources.files("rbnet").joinpath("assets", name))
