"""Vendor report extraction and canonical round-trips."""

from __future__ import annotations

import json
import random

import pytest

from timelyhls.errors import ParseError, VersionError
from timelyhls.reports import (
    canonical_dumps,
    canonical_load,
    canonical_save,
    default_profile,
    parse_vendor_report,
)

from conftest import FIXTURES, random_qor

GOLDEN = (FIXTURES / "vendor_report.txt").read_text()


class TestVendorParse:
    def test_golden_fixture(self):
        r = parse_vendor_report(GOLDEN, default_profile())
        assert r.timing.wns_ns == -0.08
        assert r.timing.tns_ns == -0.24
        assert r.timing.met is False
        assert r.timing.clock_ns == 10.0
        assert r.resources.ff == 247
        assert r.resources.lut == 619
        assert r.resources.dsp == 5
        assert r.resources.bram == 3
        assert r.latency_cycles == 16531
        assert [(m.loop_label, m.ii, m.depth, m.pipelined) for m in r.loops] == [
            ("ROW", 16, 11, True),
            ("COL", None, 8, False),
        ]

    def test_all_zero_fixture_meets_timing(self):
        text = (
            "WNS(ns): 0.0  TNS(ns): 0.0\nClock (ns): 10.0\n"
            "Slice LUTs | 0 |\nSlice Registers | 0 |\nDSPs | 0 |\nBlock RAM Tile | 0 |\n"
            "Total Latency (cycles): 0\n"
        )
        r = parse_vendor_report(text, default_profile())
        assert r.timing.met is True
        assert r.timing.wns_ns == 0.0
        assert r.resources.ff == 0

    def test_empty_text_reports_wns_first(self):
        with pytest.raises(ParseError, match="wns"):
            parse_vendor_report("", default_profile())

    def test_missing_pattern_in_profile(self):
        profile = dict(default_profile())
        del profile["dsp"]
        with pytest.raises(ParseError, match="dsp"):
            parse_vendor_report(GOLDEN, profile)

    def test_first_match_wins(self):
        text = GOLDEN + "\nWNS(ns): 99.0\n"
        r = parse_vendor_report(text, default_profile())
        assert r.timing.wns_ns == -0.08


class TestCanonical:
    def test_round_trip_thousand(self, tmp_path):
        rng = random.Random(21)
        path = tmp_path / "qor.json"
        for _ in range(1000):
            report = random_qor(rng)
            canonical_save(report, path)
            assert canonical_load(path) == report

    def test_byte_stable_reserialization(self, tmp_path):
        report = random_qor(random.Random(22))
        first = canonical_dumps(report)
        second = canonical_dumps(canonical_load_path(tmp_path, first))
        assert first == second

    def test_met_recomputed_on_load(self, tmp_path):
        report = random_qor(random.Random(23))
        raw = json.loads(canonical_dumps(report))
        raw["timing"]["wns_ns"] = -1.5
        raw["timing"]["met"] = True  # lies; loader must not trust it
        path = tmp_path / "qor.json"
        path.write_text(json.dumps(raw))
        assert canonical_load(path).timing.met is False

    def test_unknown_key_ignored_with_warning(self, tmp_path, caplog):
        report = random_qor(random.Random(24))
        raw = json.loads(canonical_dumps(report))
        raw["vendor_notes"] = "extra"
        path = tmp_path / "qor.json"
        path.write_text(json.dumps(raw))
        with caplog.at_level("WARNING"):
            assert canonical_load(path) == report
        assert "vendor_notes" in caplog.text

    def test_missing_timing_is_version_error(self, tmp_path):
        report = random_qor(random.Random(25))
        raw = json.loads(canonical_dumps(report))
        del raw["timing"]
        path = tmp_path / "qor.json"
        path.write_text(json.dumps(raw))
        with pytest.raises(VersionError):
            canonical_load(path)

    def test_schema_version_mismatch(self, tmp_path):
        report = random_qor(random.Random(26))
        raw = json.loads(canonical_dumps(report))
        raw["schema_version"] = 2
        path = tmp_path / "qor.json"
        path.write_text(json.dumps(raw))
        with pytest.raises(VersionError):
            canonical_load(path)


def canonical_load_path(tmp_path, text):
    path = tmp_path / "reload.json"
    path.write_text(text)
    return canonical_load(path)
