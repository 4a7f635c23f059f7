"""Python access to the ffdlab C++ core."""

import json

from ._ffdlab import (  # noqa: F401
    FfdlabError,
    __version__,
    adf_test,
    d_sweep,
    ema_volatility,
    ffd_transform,
    ga_optimize,
    generate_synthetic,
    generate_weights,
    minimal_d,
    train_and_predict,
    triple_barrier_labels,
)
from . import _ffdlab


def classification_report(y_true, y_pred):
    return json.loads(_ffdlab.classification_report(list(y_true), list(y_pred)))


def performance_stats(equity, timestamps, trade_count=0):
    return json.loads(_ffdlab.performance_stats(list(equity), list(timestamps), trade_count))


def run_pipeline(config, run_dir):
    """Run the full pipeline. `config` is a dict using the CLI's JSON key tree."""
    return json.loads(_ffdlab.run_pipeline(json.dumps(config), str(run_dir)))
