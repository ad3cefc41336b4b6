"""Subdivision against Shepard and first-order MLS on the same noisy data.

All methods see the same 227 noisy samples and the same weight support L;
errors are measured at the level-5 subdivision vertices in [-1, 1]^2.

    python3 demos/03_method_comparison.py
"""

from wlsubdiv.experiments import ExperimentConfig, format_table, run_comparison_experiment

config = ExperimentConfig(mesh="fixture:0", noise_sd=0.2, seed=0, iterations=5)
rows = run_comparison_experiment(config, Ls=(1.0, 2.0))
print(format_table(rows))

# With L = 1 every smoothing method cuts the RMS error of the raw samples
# by 50-60%; with L = 2 the fits over-smooth and bias dominates.
