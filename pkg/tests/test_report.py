"""Artifact writers: hashing, delimited output, and figure determinism."""

import json

import numpy as np
import pytest

from expdiag.report import (config_hash, fig_ppc_scatter, run_meta, save_svg,
                            write_csv, write_json)


class TestConfigHash:
    def test_insensitive_to_key_order(self):
        a = {"seed": 3, "model": "flat", "budget": "quick"}
        b = {"budget": "quick", "model": "flat", "seed": 3}
        assert config_hash(a) == config_hash(b)

    def test_sensitive_to_values(self):
        assert config_hash({"seed": 3}) != config_hash({"seed": 4})

    def test_numpy_scalars_normalized(self):
        assert config_hash({"x": np.float64(1.5)}) == config_hash({"x": 1.5})
        assert config_hash({"n": np.int64(7)}) == config_hash({"n": 7})

    def test_twelve_hex_digits(self):
        h = config_hash({"a": 1})
        assert len(h) == 12
        int(h, 16)


class TestWriters:
    def test_json_embeds_meta(self, tmp_path):
        cfg = {"seed": 9, "model": "flat"}
        path = tmp_path / "x.json"
        write_json(path, {"value": 1.25}, cfg)
        loaded = json.loads(path.read_text())
        assert loaded["meta"] == run_meta(cfg)
        assert loaded["meta"]["seed"] == 9
        assert loaded["value"] == 1.25

    def test_csv_header_comment_and_floats(self, tmp_path):
        cfg = {"seed": 2}
        path = tmp_path / "t.csv"
        write_csv(path, [{"a": 1 / 3, "b": "x"}], cfg)
        text = path.read_text().splitlines()
        assert text[0].startswith("# config_hash=")
        assert "seed=2" in text[0]
        assert text[1] == "a,b"
        assert text[2].startswith("0.333333333333,")

    def test_csv_rejects_empty(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv(tmp_path / "e.csv", [], {"seed": 0})

    def test_identical_runs_identical_bytes(self, tmp_path):
        cfg = {"seed": 1, "budget": "quick"}
        rows = [{"x": i, "y": i ** 0.5} for i in range(5)]
        write_csv(tmp_path / "a.csv", rows, cfg)
        write_csv(tmp_path / "b.csv", rows, cfg)
        assert (tmp_path / "a.csv").read_bytes() \
            == (tmp_path / "b.csv").read_bytes()


class TestSvg:
    def _table(self):
        rng = np.random.default_rng(0)
        proj = rng.standard_normal(60)
        p = rng.uniform(size=60)
        return np.column_stack([proj, p])

    def test_svg_bytes_reproducible(self, tmp_path):
        cfg = {"seed": 0}
        table = self._table()
        for name in ("a.svg", "b.svg"):
            fig = fig_ppc_scatter(table, 0.3, "stat", "theta 0")
            save_svg(fig, tmp_path / name, cfg)
        assert (tmp_path / "a.svg").read_bytes() \
            == (tmp_path / "b.svg").read_bytes()

    def test_svg_mentions_meta(self, tmp_path):
        cfg = {"seed": 5}
        fig = fig_ppc_scatter(self._table(), 0.5, "stat", "theta 0")
        save_svg(fig, tmp_path / "m.svg", cfg)
        text = (tmp_path / "m.svg").read_text()
        assert config_hash(cfg) in text
        assert "seed=5" in text
