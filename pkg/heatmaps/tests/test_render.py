import numpy as np
import pytest

from sweep_heatmaps.cli import cli_main
from sweep_heatmaps.render import (
    EXPECTED_HEADER,
    CsvFormatError,
    HeatmapSpec,
    build_figure,
    load_records,
    panel_title,
    pivot,
    render,
)

HEADER = ",".join(EXPECTED_HEADER)


def write_csv(path, rows):
    lines = [HEADER] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def sample_rows(mus=(2, 3), sigmas=(2, 4, 6), ss=(2, 4, 6), rate=None):
    rows = []
    for mu in mus:
        for sigma in sigmas:
            for s in ss:
                r = rate if rate is not None else round(1.0 - 0.05 * (mu + sigma + s), 2)
                succ = int(round(r * 20))
                rows.append((mu, sigma, s, 20, succ, r, 3.5, 1e-14, 0.0, sigma * 2))
    return rows


class TestLoad:
    def test_round_trip(self, tmp_path):
        path = write_csv(tmp_path / "ok.csv", sample_rows())
        records = load_records(path)
        assert len(records) == 18
        assert records[0]["mu"] == 2
        assert records[0]["success_rate"] == pytest.approx(0.7)

    def test_header_mismatch_names_column(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("mu,sigma,s,bogus,successes,success_rate,mean_iterations,mean_residual,mean_runtime_ms,key_bits\n")
        with pytest.raises(CsvFormatError, match="column 4 is 'bogus', expected 'trials'"):
            load_records(str(bad))

    def test_truncated_header(self, tmp_path):
        bad = tmp_path / "short.csv"
        bad.write_text("mu,sigma,s\n")
        with pytest.raises(CsvFormatError, match="column 4 is '<missing>'"):
            load_records(str(bad))

    def test_empty_file(self, tmp_path):
        bad = tmp_path / "empty.csv"
        bad.write_text("")
        with pytest.raises(CsvFormatError, match="empty file"):
            load_records(str(bad))

    def test_row_diagnostic_carries_line_number(self, tmp_path):
        bad = tmp_path / "row.csv"
        bad.write_text(HEADER + "\n2,2,2,20,20,not_a_number,3.5,1e-14,0.0,4\n")
        with pytest.raises(CsvFormatError, match="row 2"):
            load_records(str(bad))

    def test_field_count_diagnostic(self, tmp_path):
        bad = tmp_path / "fields.csv"
        bad.write_text(HEADER + "\n2,2,2\n")
        with pytest.raises(CsvFormatError, match="row 2 has 3 fields"):
            load_records(str(bad))


class TestPivot:
    def test_grid_orientation(self, tmp_path):
        rows = [
            (2, 2, 2, 20, 20, 1.0, 3.0, 1e-14, 0.0, 4),
            (2, 6, 2, 20, 10, 0.5, 3.0, 1e-14, 0.0, 12),
            (2, 2, 4, 20, 0, 0.0, 3.0, 1e-14, 0.0, 4),
        ]
        records = load_records(write_csv(tmp_path / "p.csv", rows))
        panels = pivot(records)
        sigmas, ss, grid = panels[2]
        assert sigmas == [2, 6]
        assert ss == [2, 4]
        # rows follow s, columns follow sigma
        assert grid[0, 0] == 1.0
        assert grid[0, 1] == 0.5
        assert grid[1, 0] == 0.0
        assert grid.mask[1, 1]  # (sigma=6, s=4) absent from the CSV

    def test_value_column_selection(self, tmp_path):
        records = load_records(write_csv(tmp_path / "v.csv", sample_rows(mus=(2,))))
        panels = pivot(records, value_column="mean_iterations")
        _, _, grid = panels[2]
        assert float(grid[0, 0]) == 3.5


class TestFigure:
    def test_captions(self):
        assert panel_title(2, 10) == "Recovery rate for 2 of 10 active users"
        assert panel_title(4, None) == "Recovery rate for 4 active users"

    def test_axis_labels_and_title(self, tmp_path):
        records = load_records(write_csv(tmp_path / "f.csv", sample_rows()))
        sigmas, ss, grid = pivot(records)[2]
        fig = build_figure(2, sigmas, ss, grid, total_users=6)
        ax = fig.axes[0]
        assert ax.get_title() == "Recovery rate for 2 of 6 active users"
        assert "channel sparsity" in ax.get_xlabel()
        assert "signal sparsity" in ax.get_ylabel()
        assert [t.get_text() for t in ax.get_xticklabels()] == ["2", "4", "6"]
        assert [t.get_text() for t in ax.get_yticklabels()] == ["2", "4", "6"]
        import matplotlib.pyplot as plt

        plt.close(fig)

    def test_uniform_rate_renders_single_color(self, tmp_path):
        records = load_records(write_csv(tmp_path / "u.csv", sample_rows(rate=1.0)))
        sigmas, ss, grid = pivot(records)[2]
        fig = build_figure(2, sigmas, ss, grid)
        image = fig.axes[0].images[0]
        data = image.get_array()
        assert float(data.min()) == float(data.max()) == 1.0
        rgba = image.cmap(image.norm(np.asarray(data)))
        assert len(np.unique(rgba.reshape(-1, 4), axis=0)) == 1
        import matplotlib.pyplot as plt

        plt.close(fig)

    def test_color_scale_fixed_to_unit_interval(self, tmp_path):
        records = load_records(write_csv(tmp_path / "c.csv", sample_rows()))
        sigmas, ss, grid = pivot(records)[3]
        fig = build_figure(3, sigmas, ss, grid)
        image = fig.axes[0].images[0]
        assert image.norm.vmin == 0.0
        assert image.norm.vmax == 1.0
        import matplotlib.pyplot as plt

        plt.close(fig)


class TestRender:
    def test_one_file_per_mu(self, tmp_path):
        csv_path = write_csv(tmp_path / "sweep.csv", sample_rows(mus=(2, 3)))
        written = render(HeatmapSpec(csv_path=csv_path, out_dir=str(tmp_path / "figs")))
        assert [p.name for p in written] == ["recovery_rate_mu2.png", "recovery_rate_mu3.png"]
        assert all(p.exists() for p in written)

    def test_default_output_next_to_csv(self, tmp_path):
        csv_path = write_csv(tmp_path / "sweep.csv", sample_rows(mus=(2,)))
        written = render(HeatmapSpec(csv_path=csv_path))
        assert written[0].parent == tmp_path

    def test_byte_stable_across_runs(self, tmp_path):
        csv_path = write_csv(tmp_path / "sweep.csv", sample_rows())
        first = render(HeatmapSpec(csv_path=csv_path, out_dir=str(tmp_path / "a"), total_users=6))
        second = render(HeatmapSpec(csv_path=csv_path, out_dir=str(tmp_path / "b"), total_users=6))
        for p1, p2 in zip(first, second):
            assert p1.read_bytes() == p2.read_bytes()

    def test_bad_value_column_rejected(self, tmp_path):
        csv_path = write_csv(tmp_path / "sweep.csv", sample_rows())
        with pytest.raises(CsvFormatError, match="value column"):
            HeatmapSpec(csv_path=csv_path, value_column="nope")


class TestCli:
    def test_renders_and_reports(self, tmp_path, capsys):
        csv_path = write_csv(tmp_path / "sweep.csv", sample_rows())
        rc = cli_main([csv_path, "--out-dir", str(tmp_path / "figs"), "--total-users", "6"])
        out = capsys.readouterr().out
        assert rc == 0
        assert out.count("wrote") == 2

    def test_malformed_csv_exits_nonzero(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text(HEADER + "\n2,2,2,20,20,xx,3.5,1e-14,0.0,4\n")
        rc = cli_main([str(bad)])
        assert rc == 1
        assert "row 2" in capsys.readouterr().err

    def test_missing_file_exits_nonzero(self, tmp_path, capsys):
        rc = cli_main([str(tmp_path / "absent.csv")])
        assert rc == 1
        assert "error:" in capsys.readouterr().err
