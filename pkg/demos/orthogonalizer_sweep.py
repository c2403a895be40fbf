"""Run the orthogonalization comparison sweep and summarise it.

Equivalent to: htica sweep --config demos/orthogonalizer_sweep.cfg --seed 2017

Run: python demos/orthogonalizer_sweep.py
"""
from pathlib import Path

from htica.harness import emit_csv, emit_plot_data, load_config, plot_series, run_experiment

cfg = load_config(Path(__file__).with_name("orthogonalizer_sweep.cfg"))
table = run_experiment(cfg, progress=lambda N, t: print(f"  N={N} trial={t}"))
emit_csv(table, cfg.output_path)
emit_plot_data(table, cfg.plot_dir)

print(f"{'pipeline':<28} {'N':>7} {'median':>8} {'q25':>8} {'q75':>8}")
for (method, contrast, damped), series in sorted(plot_series(table).items()):
    label = f"{method}/{contrast}/{'damped' if damped else 'raw'}"
    for N, med, q25, q75 in series:
        print(f"{label:<28} {N:>7} {med:>8.4f} {q25:>8.4f} {q75:>8.4f}")
