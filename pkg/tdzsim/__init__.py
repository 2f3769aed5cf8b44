import logging.config


def logging_config(formatter='standard', log_file=None):
    """ dictConfig for the package; the command line uses the message-only formatter and may add a log file """
    handlers = {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": formatter,
        }
    }
    if log_file is not None:
        handlers["file"] = {
            "class": "logging.FileHandler",
            "formatter": "standard",
            "filename": log_file,
            "mode": "w",
        }
    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "standard": {
                "format": "%(asctime)s %(levelname)s: %(message)s",
                'datefmt': '%Y-%m-%d %H:%M:%S'
                },
            "minimal": {
                "format": "%(levelname)s: %(message)s",
                },
            },
        "handlers": handlers,
        "loggers": {
            "": {"handlers": list(handlers)}
        },
    }


logging.config.dictConfig(logging_config())

from tdzsim.pipeline.core import Pipeline
from tdzsim.models.common.measurement import Measurement
from tdzsim.models.crossbar.grid import SensorGrid, TerminationPolicy
from tdzsim._version import __version__
