use hoch_harness::config::{load, parse_config, render, Overrides};
use hoch_harness::presets::{preset, DEFAULT_PRESET, PRESET_NAMES};
use hoch_harness::scenario::{Diagnostic, FormulationSpec, Profile};
use hoch_harness::HarnessError;

fn issues(e: HarnessError) -> Vec<String> {
    match e {
        HarnessError::Config(v) => v,
        other => panic!("expected a configuration error, got {other}"),
    }
}

#[test]
fn empty_file_is_the_default_preset() {
    let s = parse_config("", None).unwrap();
    assert_eq!(s, preset(DEFAULT_PRESET).unwrap());
}

#[test]
fn every_preset_is_valid_and_named() {
    for name in PRESET_NAMES {
        let s = preset(name).unwrap();
        assert_eq!(s.name, name);
        assert!(s.issues().is_empty(), "{name}: {:?}", s.issues());
    }
    assert!(preset("nope").is_none());
}

#[test]
fn command_line_preset_beats_file_preset() {
    let text = "preset = \"chb\"\n";
    assert_eq!(parse_config(text, None).unwrap().params.b, 2.5);
    assert_eq!(parse_config(text, Some("2cdp")).unwrap().params.b, 3.0);
}

#[test]
fn keys_layer_over_the_preset() {
    let s = parse_config("preset = \"2cdp\"\n[params]\nkappa = 0.25\n[grid]\nL = 30.0\n", None).unwrap();
    let base = preset("2cdp").unwrap();
    assert_eq!(s.params.kappa, 0.25);
    assert_eq!(s.params.b, base.params.b);
    assert_eq!(s.grid.half_length, 30.0);
    assert_eq!(s.grid.n, base.grid.n);
}

#[test]
fn all_unknown_keys_are_reported_together() {
    let text = "[params]\nbeta = 1.0\n[grid]\nn = 256\nsize = 3\n[nonsense]\nx = 1\n";
    let v = issues(parse_config(text, None).unwrap_err());
    assert_eq!(v.len(), 3, "{v:?}");
    for key in ["params.beta", "grid.size", "nonsense"] {
        assert!(v.iter().any(|m| m.contains(key)), "{key} missing from {v:?}");
    }
}

#[test]
fn naming_a_profile_replaces_the_preset_profile() {
    let text = "[initial.rho]\nprofile = \"bump\"\namp = 0.2\nwidth = 2.0\ncenter = 1.0\n";
    let s = parse_config(text, None).unwrap();
    assert_eq!(s.initial.rho, Profile::Bump { amp: 0.2, width: 2.0, center: 1.0 });
    let s = parse_config("[initial.rho]\namp = 0.7\n", None).unwrap();
    assert!(matches!(s.initial.rho, Profile::Gaussian { amp, .. } if amp == 0.7));
}

#[test]
fn wrong_types_and_unknown_presets_are_configuration_errors() {
    assert_eq!(parse_config("[grid]\nn = \"many\"\n", None).unwrap_err().exit_code(), 1);
    assert_eq!(parse_config("preset = \"nope\"\n", None).unwrap_err().exit_code(), 1);
    assert_eq!(parse_config("preset = 3\n", None).unwrap_err().exit_code(), 1);
    assert_eq!(parse_config("not toml at all [", None).unwrap_err().exit_code(), 1);
    assert_eq!(parse_config("[diagnostics]\nenabled = [\"telepathy\"]\n", None).unwrap_err().exit_code(), 1);
}

#[test]
fn validation_lists_every_offending_field() {
    let text = "[grid]\nn = 1000\nL = -1.0\n[control]\ncfl = 2.0\nt_final = -1.0\n";
    let s = parse_config(text, None).unwrap();
    let v = s.issues();
    assert_eq!(v.len(), 4, "{v:?}");
    for key in ["grid.n", "grid.L", "control.cfl", "control.t_final"] {
        assert!(v.iter().any(|m| m.contains(key)), "{key} missing from {v:?}");
    }
    assert_eq!(issues(s.validate().unwrap_err()), v);
}

#[test]
fn nonlocal_formulation_needs_first_order_inertia() {
    let s = parse_config("preset = \"highorder\"\n[control]\nformulation = \"nonlocal\"\n", None).unwrap();
    assert!(s.issues().iter().any(|m| m.contains("formulation")));
}

#[test]
fn duplicated_diagnostics_are_rejected() {
    let s = parse_config("[diagnostics]\nenabled = [\"casimir\", \"casimir\"]\n", None).unwrap();
    assert_eq!(s.issues().len(), 1);
}

#[test]
fn overrides_replace_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    std::fs::write(&path, "[grid]\nn = 256\n").unwrap();
    let o = Overrides {
        n: Some(512),
        half_length: Some(15.0),
        t_final: Some(0.5),
        cfl: Some(0.2),
        formulation: Some(FormulationSpec::Nonlocal),
    };
    let s = load(&path, None, &o).unwrap();
    assert_eq!(s.grid.n, 512);
    assert_eq!(s.grid.half_length, 15.0);
    assert_eq!(s.control.t_final, 0.5);
    assert_eq!(s.control.cfl, 0.2);
    assert_eq!(s.control.formulation, FormulationSpec::Nonlocal);
    let bad = Overrides { n: Some(100), ..Overrides::default() };
    assert_eq!(load(&path, None, &bad).unwrap_err().exit_code(), 1);
    assert_eq!(load(&dir.path().join("missing.toml"), None, &o).unwrap_err().exit_code(), 1);
}

#[test]
fn rendered_scenarios_parse_back_unchanged() {
    for name in PRESET_NAMES {
        let s = preset(name).unwrap();
        let text = render(&s).unwrap();
        assert_eq!(parse_config(&text, Some(name)).unwrap(), s, "{name}");
        assert_eq!(parse_config(&text, Some("zero")).unwrap(), s, "{name} over zero");
    }
}

#[test]
fn diagnostic_names_round_trip() {
    for d in Diagnostic::ALL {
        let text = format!("[diagnostics]\nenabled = [\"{}\"]\n", d.name());
        assert_eq!(parse_config(&text, None).unwrap().diagnostics.enabled, vec![d]);
    }
}
