"""Shipped experiment presets.

``full-*`` presets carry the full-scale configuration (500k-sample streams,
600 s search budgets, 50k-sample scheduled retraining). ``desk-*`` presets
shrink stream length and budgets so a complete run takes minutes on a laptop
while keeping the same drift structure; they also cap search evaluations so
synchronous runs replay deterministically.
"""

PRESETS: dict[str, dict] = {
    "full-sea-abrupt": {
        "method": "oaml-ensemble",
        "stream": "sea-abrupt",
        "stream.length": 500_000,
        "stream.noise": 0.10,
        "stream.drift_position": 250_000,
        "n_0": 5000,
        "n_s": 5000,
        "t_max": 600.0,
        "max_train": 50_000,
        "max_evaluations": 200,
        "detector": "EDDM",
        "search": "async_ea",
    },
    "full-sea-mixed": {
        "method": "oaml-ensemble",
        "stream": "sea-mixed",
        "stream.length": 500_000,
        "stream.noise": 0.05,
        "n_0": 5000,
        "n_s": 5000,
        "t_max": 600.0,
        "max_train": 50_000,
        "max_evaluations": 200,
        "detector": "EDDM",
        "search": "async_ea",
    },
    "full-hyperplane-gradual": {
        "method": "oaml-ensemble",
        "stream": "hyperplane",
        "stream.length": 500_000,
        "stream.noise": 0.05,
        "stream.n_features": 10,
        "stream.mag_change": 0.001,
        "stream.sigma": 0.1,
        "n_0": 5000,
        "n_s": 5000,
        "t_max": 600.0,
        "max_train": 50_000,
        "max_evaluations": 200,
        "detector": "EDDM",
        "search": "async_ea",
    },
    "desk-sea-abrupt": {
        "method": "oaml-ensemble",
        "stream": "sea-abrupt",
        "stream.length": 20_000,
        "stream.noise": 0.10,
        "stream.drift_position": 10_000,
        "n_0": 1000,
        "n_s": 1000,
        "t_max": 15.0,
        "max_train": 50_000,
        "max_evaluations": 8,
        "detector": "EDDM",
        "search": "async_ea",
        "ea_population": 6,
    },
    "desk-sea-mixed": {
        "method": "oaml-ensemble",
        "stream": "sea-mixed",
        "stream.length": 20_000,
        "stream.noise": 0.05,
        "n_0": 1000,
        "n_s": 1000,
        "t_max": 30.0,
        "max_train": 50_000,
        "max_evaluations": 8,
        "detector": "EDDM",
        "search": "async_ea",
        "ea_population": 6,
    },
    "desk-sea-cyclic": {
        "method": "oaml-modelstore",
        "stream": "sea-cyclic",
        "stream.length": 15_000,
        "stream.noise": 0.05,
        "n_0": 1000,
        "n_s": 1000,
        "t_max": 30.0,
        "max_train": 50_000,
        "max_evaluations": 8,
        "detector": "EDDM",
        "search": "async_ea",
        "ea_population": 6,
    },
    "desk-hyperplane-gradual": {
        "method": "oaml-ensemble",
        "stream": "hyperplane",
        "stream.length": 20_000,
        "stream.noise": 0.05,
        "stream.n_features": 10,
        "stream.mag_change": 0.005,
        "stream.sigma": 0.1,
        "n_0": 1000,
        "n_s": 1000,
        "t_max": 30.0,
        "max_train": 50_000,
        "max_evaluations": 8,
        "detector": "EDDM",
        "search": "async_ea",
        "ea_population": 6,
    },
}
