//! Built-in scenarios at desk scale (N=32, N_RF=4, M=64, K=4, L=2): small
//! enough to finish in CI, large enough to show every qualitative trend.

use crate::scenario::Scenario;

pub struct PresetInfo {
    pub name: &'static str,
    pub summary: &'static str,
    toml: &'static str,
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "overhead-sweep-desk",
        summary: "piece-count sweep Q in {1,2,4,8} at 10 dB, three estimator flavors",
        toml: r#"
name = "overhead-sweep-desk"
methods = ["pwclra-ls", "pwclra-mmse", "pwclra-jo"]
trials = 100
base_seed = 41

[system]
snr_db = 10.0

[sweep]
q = [1, 2, 4, 8]
"#,
    },
    PresetInfo {
        name: "snr-sweep-desk",
        summary: "SNR sweep -10..30 dB at Q=4, every method plus the genie baseline",
        toml: r#"
name = "snr-sweep-desk"
methods = ["pwclra-ls", "pwclra-mmse", "pwclra-jo", "clra-ls", "clra-jo", "2d-ls"]
trials = 100
base_seed = 51

[system]
q = 4

[sweep]
snr_db = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0]
"#,
    },
    PresetInfo {
        name: "distance-sweep-desk",
        summary: "BS distance sweep 10..50 m at Q=4 and 10 dB",
        toml: r#"
name = "distance-sweep-desk"
methods = ["pwclra-jo", "clra-jo", "2d-ls"]
trials = 100
base_seed = 61

[system]
q = 4
snr_db = 10.0

[sweep]
d_x_rb_m = [10.0, 20.0, 30.0, 40.0, 50.0]
"#,
    },
    PresetInfo {
        name: "ris-size-sweep-desk",
        summary: "panel size sweep M in {32,48,64} at Q=4 and 10 dB",
        toml: r#"
name = "ris-size-sweep-desk"
methods = ["pwclra-ls", "pwclra-mmse", "pwclra-jo"]
trials = 100
base_seed = 71

[system]
q = 4
snr_db = 10.0

[sweep]
m_ris = [32, 48, 64]
"#,
    },
    PresetInfo {
        name: "upa-overhead-sweep-desk",
        summary: "piece-count sweep on a 32x2 planar panel at 10 dB",
        toml: r#"
name = "upa-overhead-sweep-desk"
methods = ["pwclra-jo"]
trials = 100
base_seed = 81

[system]
snr_db = 10.0
geometry = { upa = { n_y = 32, n_z = 2 } }

[sweep]
q = [1, 2, 4, 8]
"#,
    },
];

/// Fetch a preset by name.
pub fn get(name: &str) -> Option<Scenario> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .map(|p| Scenario::from_toml(p.toml).expect("built-in scenario is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_parse_validate_and_match_their_names() {
        for p in PRESETS {
            let sc = get(p.name).unwrap();
            assert_eq!(sc.name, p.name);
            sc.validate().unwrap();
            assert_eq!(sc.trials, 100);
        }
        assert_eq!(PRESETS.len(), 5);
        let mut names: Vec<_> = PRESETS.iter().map(|p| p.name).collect();
        names.dedup();
        assert_eq!(names.len(), 5);
    }

    #[test]
    fn unknown_preset_is_none() {
        assert!(get("no-such-preset").is_none());
    }

    #[test]
    fn sweeps_have_expected_grids() {
        assert_eq!(get("overhead-sweep-desk").unwrap().points().unwrap().len(), 4);
        let snr = get("snr-sweep-desk").unwrap();
        let pts = snr.points().unwrap();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0].snr_db, -10.0);
        assert_eq!(pts[8].snr_db, 30.0);
        assert!(pts.iter().all(|p| p.q == 4));
        assert_eq!(snr.methods.len(), 6);
        assert_eq!(get("distance-sweep-desk").unwrap().points().unwrap().len(), 5);
        assert_eq!(get("ris-size-sweep-desk").unwrap().points().unwrap().len(), 3);
        let upa = get("upa-overhead-sweep-desk").unwrap();
        assert_eq!(upa.geometry().label(), "upa32x2");
        assert_eq!(upa.points().unwrap().len(), 4);
    }
}
