"""Smoke test for the ntnpd Python module.

Build and run from the repository root:

    cargo build --release -p ntnpd-py --features extension-module
    cp target/release/libntnpd.so python/ntnpd.so
    python3 python/smoke_test.py
"""

import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import ntnpd  # noqa: E402


def main():
    assert abs(ntnpd.fspl(600e3, 2e9) - 154.03) < 0.01
    assert abs(ntnpd.slant_range(0.0, 0.0, 600e3, 0.0, 0.0) - 600e3) < 1.0
    assert abs(ntnpd.elevation_angle(0.0, 0.0, 600e3, 0.0, 0.0) - 90.0) < 1e-6

    rb = ntnpd.ReorderBuffer(0.1)
    steps = [rb.rx_ingest(sn)[0] for sn in (0, 3, 2, 4, 6)]
    steps.append(rb.on_reorder_expiry()[0])
    steps.append(rb.rx_ingest(5)[0])
    assert steps == [[0], [], [], [], [], [2, 3, 4], [5, 6]], steps
    assert not rb.timer_running

    cfg = ntnpd.Config.default()
    cfg.simulation_time_s = 2.0
    cfg.ue_count = 4
    cfg.validate()
    assert ntnpd.Config.from_toml(cfg.to_toml()).ue_count == 4

    a = ntnpd.run(cfg, "harq_timer", seed=1)
    b = ntnpd.run(cfg, "harq_timer", seed=1)
    assert a.trace_digest == b.trace_digest
    assert len(a.per_ue) == 4
    for ue in a.per_ue:
        assert ue.delivered + ue.lost == ue.sent

    with tempfile.TemporaryDirectory() as out:
        reports = ntnpd.run_batch(cfg, [1, 2], out_dir=out)
        assert sorted(os.listdir(out)) == ["cdf_success.csv", "per_run.csv", "summary.csv"]
    by_mode = {r.pd_mode: r for r in reports}
    assert set(by_mode) == set(ntnpd.PD_MODES)
    assert by_mode["off"].mean_duplicates == 0
    assert all(0.0 <= r.mean_success_pct <= 100.0 for r in reports)
    assert all(math.isclose(r.cdf[-1][1], 1.0) for r in reports)

    try:
        cfg.pd_mode = "sometimes"
    except ValueError:
        pass
    else:
        raise AssertionError("bad pd_mode accepted")

    for r in reports:
        print(f"{r.pd_mode:<10} mean={r.mean_success_pct:.3f}% dup={r.mean_duplicates:.1f}")
    print("smoke test ok")


if __name__ == "__main__":
    main()
