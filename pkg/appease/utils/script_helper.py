import logging
import os
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import List, Optional

import confidence

DEFAULT_LOGLEVEL = logging.WARNING
DEFAULTS_PATH = Path(__file__).parent.parent / 'resources' / 'defaults.yaml'
LOG_FORMAT = "[%(asctime)-15s %(levelname)s] %(name)s: %(message)s"

_installed: List[logging.Handler] = []


def load_config(config_path: Optional[str] = None) -> confidence.Configuration:
    """
    Loads the packaged defaults, with the YAML files of a comma-separated
    `config_path` layered on top (later files take precedence).
    """
    paths = [str(DEFAULTS_PATH)]
    if config_path:
        paths.extend(path for path in config_path.split(",") if path)
    return confidence.loadf(*paths)


def output_directory(cfg: confidence.Configuration, out: Optional[str] = None) -> Path:
    """
    Resolves where artifacts go: an explicit `out` wins, then the
    `APPEASE_OUT` environment variable, then `output.directory`.
    """
    return Path(out or os.environ.get('APPEASE_OUT') or cfg.get('output.directory', default='.'))


def setup_logging(path, verbosity_offset: int, file_level: int = logging.INFO) -> List[logging.Handler]:
    """
    Sends log output to the console, at WARNING shifted ten levels per
    `verbosity_offset`, and to a rotating file at `path`. Handlers from an
    earlier call are replaced, so commands can be invoked repeatedly in
    one interpreter.
    """
    console_level = max(logging.DEBUG, min(logging.CRITICAL, DEFAULT_LOGLEVEL - verbosity_offset * 10))
    fmt = logging.Formatter(LOG_FORMAT)
    root = logging.getLogger()
    for handler in _installed:
        root.removeHandler(handler)
        handler.close()
    _installed.clear()

    console = logging.StreamHandler()
    console.setLevel(console_level)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    logfile = RotatingFileHandler(path, mode="a", backupCount=3)
    logfile.setLevel(file_level)

    for handler in (console, logfile):
        handler.setFormatter(fmt)
        root.addHandler(handler)
        _installed.append(handler)
    root.setLevel(logging.DEBUG)
    return list(_installed)
