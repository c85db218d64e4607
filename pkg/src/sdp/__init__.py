"""SLAM dataset profiler: quantitative characterization of visual-inertial datasets.

The package turns heterogeneous dataset layouts (KITTI odometry, ASL-style
EuroC/TUM-VI trees) into a unified manifest, runs a suite of general,
inertial, and visual metric engines over every sequence, stores the results
in a (sequence x element) scoreboard, and derives dataset-level statistics,
diversity scores, correlations, and coverage subsets from it.
"""

__version__ = "0.1.0"
