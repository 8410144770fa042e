"""Regenerate sample_exponential_t60.csv: 200 intervals of Exponential(mean 82616 b), T = 60 s."""
import numpy as np

rng = np.random.default_rng(60)
volumes = rng.exponential(82616.0, size=200)
with open("sample_exponential_t60.csv", "w", newline="\n") as f:
    f.write("interval_seconds,volume_bits\n")
    for v in volumes:
        f.write(f"60,{v:.3f}\n")
