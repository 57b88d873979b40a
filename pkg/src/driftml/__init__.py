"""driftml: online learning pipelines that are continuously re-designed under concept drift.

The package couples a stream-learning stack (incremental preprocessors,
classifiers and drift detectors) with a budgeted pipeline search engine and a
controller that re-runs the search whenever the error stream drifts, swapping
in the winner via one of three adaptation strategies (global replacement,
backup ensemble, model store).
"""

from driftml.streams import Instance, StreamSchema

__version__ = "0.1.0"

__all__ = ["Instance", "StreamSchema", "__version__"]
