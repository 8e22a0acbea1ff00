"""
Commutator norm against the BMO norm
====================================

For random matrix symbols the ratio ||C_B|| / ||B||_BMO stays inside a
band. The spread max/min of that band barely moves between seeds.
"""
from haarlab.experiments import ExperimentConfig, sandwich_experiment, sandwich_summary

for d in (1, 2):
    for seed in (1, 2):
        cfg = ExperimentConfig(depth=3, dim=d, trials=20, seed=seed)
        s = sandwich_summary(sandwich_experiment(cfg, entry_norms=False))["shift"]
        print(f"d={d} seed={seed}: ratios in [{s['min']:.3f}, {s['max']:.3f}], spread {s['spread']:.3f}")

# The same report from the command line:
#   lab sandwich --depth 3 --dim 2 --trials 20 --seed 1 --out sandwich.json
