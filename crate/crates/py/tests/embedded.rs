use ntnpd::ntnpd as ntnpd_module;
use pyo3::prelude::*;

#[test]
fn module_runs_inside_embedded_interpreter() {
    pyo3::append_to_inittab!(ntnpd_module);
    Python::initialize();
    Python::attach(|py| {
        py.run(
            cr#"
import ntnpd
cfg = ntnpd.Config.default()
cfg.simulation_time_s = 1.0
cfg.ue_count = 3
r = ntnpd.run(cfg, "blind", seed=2)
assert len(r.per_ue) == 3
assert all(u.delivered + u.lost == u.sent for u in r.per_ue)
assert abs(ntnpd.fspl(600e3, 2e9) - 154.03) < 0.01
try:
    ntnpd.run(cfg, "never", seed=1)
    raise AssertionError("bad mode accepted")
except ValueError:
    pass
"#,
            None,
            None,
        )
        .unwrap_or_else(|e| panic!("{e}"));
    });
}
