"""Run manifests and emitted plot scripts."""

import csv
import math
import os
import sys
import time

import numpy as np


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return ",".join(_fmt(v) for v in value)
    return str(value).replace("\n", " ")


class RunManifest:
    """Flat ``key=value`` provenance record, written even when a run fails."""

    def __init__(self, out_dir, argv=None):
        self.out_dir = out_dir
        self.entries = {"command": " ".join(argv if argv is not None else sys.argv)}
        self.files = []
        self._t0 = time.perf_counter()

    def __setitem__(self, key, value):
        self.entries[key] = value

    def __getitem__(self, key):
        return self.entries[key]

    def update(self, mapping, prefix=""):
        for k, v in mapping.items():
            self.entries[prefix + k] = v

    def path(self, name):
        return os.path.join(self.out_dir, name)

    def add_file(self, name):
        self.files.append(name)
        return self.path(name)

    def write(self, name="manifest.txt"):
        os.makedirs(self.out_dir, exist_ok=True)
        self.entries["wall_clock_s"] = round(time.perf_counter() - self._t0, 3)
        self.entries["files"] = self.files
        with open(self.path(name), "w") as fh:
            for k, v in self.entries.items():
                fh.write(f"{k}={_fmt(v)}\n")
        return self.path(name)


def read_manifest(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            if "=" in line:
                k, v = line.rstrip("\n").split("=", 1)
                out[k] = v
    return out


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def _cell(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else repr(v)
    return v


_SERIES_SCRIPT = '''"""Plot {title} from the CSV files in this directory."""
import csv
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(name):
    with open(name, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r["t"]) for r in rows], [float(r["value"]) for r in rows], rows[0]["label"]


fig, ax = plt.subplots(figsize=(6, 4))
for name in {files!r}:
    t, v, label = load(name)
    ax.plot(t, v, {tl_style} if label == "TL" else "-", label=label)
ax.set_xlabel("{xlabel}")
ax.set_ylabel("{ylabel}")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else "{png}", dpi=150)
'''


def series_plot_script(files, kind):
    labels = {
        "occupation": ("mirror occupation", r"$\\langle c^\\dagger c\\rangle$"),
        "entropy": ("mirror entropy", r"$S_c$ (nats)"),
    }
    title, ylabel = labels[kind]
    return _SERIES_SCRIPT.format(
        title=title, files=list(files), tl_style='"k--"', xlabel=r"$t$ (units of $1/\\omega$)",
        ylabel=ylabel, png=f"{kind}.png",
    )
