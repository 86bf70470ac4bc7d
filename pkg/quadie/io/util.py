import os


def _read_content(path_or_buf):
    """
    Return the text behind a path, a file-like object or a literal string

    Anything else (for example an already decoded dict) is passed through.
    """
    if isinstance(path_or_buf, os.PathLike):
        path_or_buf = os.fspath(path_or_buf)

    if isinstance(path_or_buf, str):
        try:
            exists = os.path.exists(path_or_buf)
        except (TypeError, ValueError):
            exists = False

        if exists:
            with open(path_or_buf, encoding="utf-8") as fh:
                data = fh.read()
        else:
            data = path_or_buf
    elif hasattr(path_or_buf, "read"):
        data = path_or_buf.read()
    else:
        data = path_or_buf

    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data
