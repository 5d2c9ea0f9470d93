"""Figure rendering.

Output is a static vector file whose bytes depend only on the spec and
the input CSV: matplotlib's SVG id hashing is salted with a fixed
string and the date metadata is suppressed.
"""

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "plotviz"

import matplotlib.pyplot as plt

from plotviz.spec import (COMPONENT_COLUMNS, PlotSpec, axis_points,
                          load_results, split_duration_axes)

_STYLES = ("o-", "s--", "^-.", "d:", "v-", "x--")


def _save(fig, path: str):
    vector = path.endswith((".svg", ".pdf"))
    fig.savefig(path, format=path.rsplit(".", 1)[-1] if vector else None,
                metadata={"Date": None} if vector else None)
    plt.close(fig)


def _selected_mechanisms(spec: PlotSpec, table) -> list[str]:
    return list(spec.mechanisms) or table.mechanisms


def render_welfare_sweep(spec: PlotSpec) -> None:
    table = load_results(spec.input_csv)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for i, mech in enumerate(_selected_mechanisms(spec, table)):
        rows = [r for r in table.rows if r["mechanism"] == mech]
        for j, comp in enumerate(spec.components):
            xs, ys = axis_points(rows, COMPONENT_COLUMNS[comp])
            label = mech if comp == "total" else f"{mech} ({comp})"
            ax.plot(xs, ys, _STYLES[(i + j) % len(_STYLES)], label=label)
    names = {r["param_name"] for r in table.rows}
    ax.set_xlabel(names.pop() if len(names) == 1 else "parameter value")
    ax.set_ylabel("social welfare")
    if table.rows:
        ax.legend()
    fig.tight_layout()
    _save(fig, spec.output_path)


def render_duration_grid(spec: PlotSpec) -> None:
    table = load_results(spec.input_csv)
    groups = split_duration_axes(table)
    mechanisms = _selected_mechanisms(spec, table)
    n_rows = max(1, len(mechanisms))
    n_cols = max(1, len(groups))
    fig, axes = plt.subplots(n_rows, n_cols, squeeze=False,
                             figsize=(3.2 * n_cols, 2.6 * n_rows))
    for col, (name, rows) in enumerate(sorted(groups.items())):
        for row, mech in enumerate(mechanisms):
            ax = axes[row][col]
            xs, ys = axis_points(
                [r for r in rows if r["mechanism"] == mech],
                "mean_duration_s")
            ax.plot(xs, ys, _STYLES[row % len(_STYLES)])
            ax.set_title(f"{mech} | {name}", fontsize=8)
            ax.set_xlabel(name.split("@", 1)[0])
            ax.set_ylabel("display duration (s)")
    fig.tight_layout()
    _save(fig, spec.output_path)


def render(spec: PlotSpec) -> None:
    """Draw the figure described by ``spec`` and write it to disk."""
    if spec.kind == "welfare_sweep":
        render_welfare_sweep(spec)
    else:
        render_duration_grid(spec)
