//! Standalone matplotlib scripts that redraw the figures from the CSVs.

const PRELUDE: &str = r##"import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent


def load(name):
    with open(HERE / name, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header, body = rows[0], rows[1:]
    return {h: [float(r[i]) for r in body] for i, h in enumerate(header)}

"##;

const FIELDS: &str = r##"
data = load("fields.csv")
fig, ax = plt.subplots(figsize=(5, 3.5))
for ratio in sorted(set(data["gamma_over_eta1"]), reverse=True):
    idx = [i for i, r in enumerate(data["gamma_over_eta1"]) if r == ratio]
    ax.plot([data["gamma_t"][i] for i in idx], [data["omega_z_over_eta1"][i] for i in idx],
            label=f"$\\gamma/\\eta_1 = {ratio:g}$")
ax.set_xlabel(r"$\gamma t$")
ax.set_ylabel(r"$\Omega_z/\eta_1$")
ax.set_ylim(-5, 5)
ax.legend()
"##;

const LEVELS: &str = r##"
data = load("levels.csv")
fig, ax = plt.subplots(figsize=(5, 3.5))
t = data["t_eta1"]
for key, values in data.items():
    if key.startswith("E_diabatic_"):
        ax.plot(t, values, "-", color="C0")
    elif key.startswith("E_adiabatic_reference_"):
        ax.plot(t, values, "--", color="C1")
ax.set_xlabel(r"$\eta_1 t$")
ax.set_ylabel(r"$E/\eta_1$")
ax.set_ylim(-4, 4)
"##;

const POPULATIONS: &str = r##"
data = load("populations.csv")
fig, ax = plt.subplots(figsize=(5, 3.5))
t = data["t_eta1"]
for key, values in data.items():
    if key.startswith("p_"):
        ax.plot(t, values, label=rf"$|{key[2:]}\rangle$")
ax.set_xlabel(r"$\eta_1 t$")
ax.set_ylabel("population")
ax.legend()
"##;

const TRUNCATION: &str = r##"
data = load("truncation_scan.csv")
fig, ax = plt.subplots(figsize=(5, 3.5))
ratios = sorted(set(data["gamma_over_eta1"]))
for k, ratio in enumerate(ratios):
    idx = [i for i, r in enumerate(data["gamma_over_eta1"]) if r == ratio]
    d0 = [data["delta0"][i] for i in idx]
    ax.plot(d0, [data["P_tangent"][i] for i in idx], color=f"C{k}", label=f"$\\gamma/\\eta_1 = {ratio:g}$")
    ax.plot(d0, [data["P_cd"][i] for i in idx], ":", color=f"C{k}")
ax.set_xlabel(r"$\delta_0$")
ax.set_ylabel(r"$P_{-+}$")
ax.legend()
"##;

fn epilogue(stem: &str) -> String {
    format!(
        "\nfig.tight_layout()\nout = sys.argv[1] if len(sys.argv) > 1 else HERE / \"{stem}.png\"\nfig.savefig(out, dpi=150)\n"
    )
}

/// Script source for a dataset stem, or `None` when the dataset has no
/// figure (the validation report).
pub fn plot_script(stem: &str) -> Option<String> {
    let body = match stem {
        "fields" => FIELDS,
        "levels" => LEVELS,
        "populations" => POPULATIONS,
        "truncation_scan" => TRUNCATION,
        _ => return None,
    };
    Some(format!("{PRELUDE}{body}{}", epilogue(stem)))
}
