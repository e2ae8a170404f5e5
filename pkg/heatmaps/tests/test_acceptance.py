"""Acceptance check: desk-grid CSV renders to per-mu heatmaps.

One heatmap per mu with sigma horizontal and s vertical, captions matching
the "Recovery rate for k of N active users" pattern, byte-stable across
repeated runs. Run with ``pytest -v -s`` to see the verdict line.
"""

import re

import matplotlib.pyplot as plt

from sweep_heatmaps.render import EXPECTED_HEADER, HeatmapSpec, build_figure, load_records, pivot, render

DESK_TOTAL_USERS = 6


def write_desk_grid_csv(path):
    """Desk-grid shaped sweep output: mu in {2,3}, sigma, s in {2,4,6}."""
    rates = {
        (2, 2, 2): 1.0, (2, 2, 4): 1.0, (2, 2, 6): 1.0,
        (2, 4, 2): 1.0, (2, 4, 4): 1.0, (2, 4, 6): 1.0,
        (2, 6, 2): 1.0, (2, 6, 4): 1.0, (2, 6, 6): 0.85,
        (3, 2, 2): 1.0, (3, 2, 4): 1.0, (3, 2, 6): 1.0,
        (3, 4, 2): 1.0, (3, 4, 4): 1.0, (3, 4, 6): 0.55,
        (3, 6, 2): 1.0, (3, 6, 4): 0.4, (3, 6, 6): 0.0,
    }
    lines = [",".join(EXPECTED_HEADER)]
    for (mu, sigma, s), rate in sorted(rates.items()):
        successes = int(round(rate * 20))
        lines.append(
            f"{mu},{sigma},{s},20,{successes},{rate},4.0,1e-14,0.0,{sigma * 2}"
        )
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def test_criterion_8_desk_grid_rendering(tmp_path):
    csv_path = write_desk_grid_csv(tmp_path / "desk.csv")

    spec = HeatmapSpec(csv_path=csv_path, out_dir=str(tmp_path / "run1"),
                       total_users=DESK_TOTAL_USERS)
    written = render(spec)
    assert [p.name for p in written] == ["recovery_rate_mu2.png", "recovery_rate_mu3.png"]

    records = load_records(csv_path)
    caption_pattern = re.compile(r"^Recovery rate for \d+ of \d+ active users$")
    for mu in (2, 3):
        sigmas, ss, grid = pivot(records)[mu]
        fig = build_figure(mu, sigmas, ss, grid, total_users=DESK_TOTAL_USERS)
        ax = fig.axes[0]
        assert caption_pattern.match(ax.get_title())
        assert ax.get_title() == f"Recovery rate for {mu} of 6 active users"
        # sigma horizontal, s vertical
        assert "channel sparsity" in ax.get_xlabel()
        assert "signal sparsity" in ax.get_ylabel()
        assert [t.get_text() for t in ax.get_xticklabels()] == ["2", "4", "6"]
        assert [t.get_text() for t in ax.get_yticklabels()] == ["2", "4", "6"]
        # spot-check a distinctive cell: (mu=3, sigma=6, s=4) -> 0.4
        if mu == 3:
            data = ax.images[0].get_array()
            assert float(data[ss.index(4), sigmas.index(6)]) == 0.4
        plt.close(fig)

    again = render(
        HeatmapSpec(csv_path=csv_path, out_dir=str(tmp_path / "run2"),
                    total_users=DESK_TOTAL_USERS)
    )
    for p1, p2 in zip(written, again):
        assert p1.read_bytes() == p2.read_bytes()

    print("ACCEPTANCE 8 desk-grid rendering: PASS "
          "(2 panels, captions and axes verified, byte-stable)")
