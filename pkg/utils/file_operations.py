# utils/file_operations.py

"""
Provides utility functions for file operations.

Every writer goes through a temporary file in the target directory followed
by os.replace, so an artifact is either absent or complete.
"""

import csv
import io
import json
import os
import tempfile

from utils.numeric_helpers import format_float, to_jsonable

__all__ = ["write_text_atomic", "save_json", "load_json", "save_csv", "load_csv"]


def write_text_atomic(text, file_path):
    """
    Writes text to a file atomically.

    Args:
        text (str): The content.
        file_path (str): The destination path.
    """
    directory = os.path.dirname(os.path.abspath(file_path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(file_path))
    try:
        with os.fdopen(fd, 'w', newline='') as f:
            f.write(text)
        os.replace(tmp_path, file_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def save_json(data, file_path):
    """
    Saves data to a JSON file.

    Args:
        data (dict): The data to save; numpy values are converted.
        file_path (str): The path to the JSON file.
    """
    write_text_atomic(json.dumps(to_jsonable(data), indent=4) + "\n", file_path)


def load_json(file_path):
    """
    Loads data from a JSON file.

    Args:
        file_path (str): The path to the JSON file.

    Returns:
        dict: The loaded data.
    """
    with open(file_path, 'r') as f:
        data = json.load(f)
    return data


def render_cell(value):
    if value is None:
        return ""
    if isinstance(value, int) and not isinstance(value, bool):
        return str(value)
    return format_float(value)


def save_csv(header, rows, file_path):
    """
    Saves rows to a CSV file with a header row; floats keep 17 significant digits.

    Args:
        header (list): Column names.
        rows (iterable): Rows of ints, floats or None.
        file_path (str): The path to the CSV file.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([render_cell(v) for v in row])
    write_text_atomic(buffer.getvalue(), file_path)


def load_csv(file_path):
    """
    Loads a CSV file written by save_csv.

    Returns:
        tuple: (header, rows) with rows as lists of strings.
    """
    with open(file_path, 'r', newline='') as f:
        reader = csv.reader(f)
        header = next(reader, [])
        return header, list(reader)
