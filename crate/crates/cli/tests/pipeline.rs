use cohtomo_cli::document::{Body, Document};
use cohtomo_cli::{run_with, EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK};
use cohtomo_core::fock::{CoherenceTensor, FixedNState};
use cohtomo_core::gadget::MeasurementSetting;
use cohtomo_core::recipe::settings_plan;
use std::f64::consts::PI;
use std::path::Path;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str], stdin: &str) -> Output {
    let argv = std::iter::once("cohtomo").chain(args.iter().copied());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(argv, &mut stdin.as_bytes(), &mut out, &mut err);
    Output { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn ok(args: &[&str], stdin: &str) -> String {
    let o = cli(args, stdin);
    assert_eq!(o.code, EXIT_OK, "{args:?}: {}", o.stderr);
    o.stdout
}

fn body(text: &str) -> Body {
    Document::from_json(text).unwrap().body
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn second_order_plan() {
    let Body::Plan(p) = body(&ok(&["plan", "--order", "2"], "")) else { panic!("not a plan") };
    assert_eq!(p.settings.len(), 9);
    let labels: Vec<_> = p.thetas.iter().chain(&p.phis).map(|a| a.label.as_str()).collect();
    assert_eq!(labels, ["π/8", "π/4", "3π/8", "2π/3", "4π/3", "2π"]);
    assert_eq!(p.parity, "even");
    let first = p.settings[0];
    assert_eq!((first.theta, first.phi), (PI / 8.0, 2.0 * PI / 3.0));
}

#[test]
fn settings_table_text_and_json() {
    let text = ok(&["table1"], "");
    assert_eq!(text.lines().filter(|l| l.contains('|')).count(), 10);
    assert!(text.contains("4.917") && text.contains("4.197"));
    let Body::Table(t) = body(&ok(&["table1", "--json"], "")) else { panic!("not a table") };
    assert_eq!(t.rows.len(), 9);
    let row = &t.rows[1];
    assert_eq!((row.theta_label.as_str(), row.phi_label.as_str()), ("π/4", "2π/3"));
    for (got, want) in row.plates.iter().zip([1.802, 2.461, 0.329]) {
        assert!((got - want).abs() < 5e-3);
    }
    assert_eq!(row.printed_plates, [1.802, 2.461, 0.329]);
    assert!(t.rows[0].note.is_some() && t.rows[1..].iter().all(|r| r.note.is_none()));
}

#[test]
fn plates_accept_degrees() {
    let Body::Plates(rad) = body(&ok(&["plates", "--theta", "0.7853981633974483", "--phi", "3.141592653589793"], ""))
    else {
        panic!()
    };
    let Body::Plates(deg) = body(&ok(&["--degrees", "plates", "--theta", "45", "--phi", "180"], "")) else { panic!() };
    for (a, b) in rad.plates.iter().zip(deg.plates) {
        assert!((a - b).abs() < 1e-12);
    }
    let Body::Plates(neg) = body(&ok(&["plates", "--theta", "-0.3", "--phi", "-1"], "")) else { panic!() };
    assert!(neg.theta >= 0.0 && neg.phi >= 0.0);
}

#[test]
fn predicted_records_reconstruct_the_oracle_tensor() {
    let dir = tempfile::tempdir().unwrap();
    for n in 1..=5 {
        // a generic pure state with complex amplitudes
        let amps: Vec<[f64; 2]> = (0..=n).map(|k| [0.3 + k as f64 * 0.1, (k as f64 * 1.7).sin()]).collect();
        let state_json = format!(
            r#"{{"schema_version": "1", "kind": "state", "payload": {{"photons": {n}, "amplitudes": {}}}}}"#,
            serde_json::to_string(&amps).unwrap()
        );
        let state_path = write(dir.path(), "state.json", &state_json);
        let records = ok(&["predict", "--state", &state_path], "");
        let Body::Tensor(t) = body(&ok(&["reconstruct", "--order", &n.to_string()], &records)) else { panic!() };
        let Body::State(sp) = body(&state_json) else { panic!() };
        let oracle = CoherenceTensor::from_state(&sp.to_state().unwrap(), n);
        let got = t.to_tensor().unwrap();
        assert!(got.max_abs_diff(&oracle) < 1e-8, "N = {n}");
        assert_eq!(t.groups.len(), settings_plan(n).unwrap().weights().len());
        assert!(t.groups.iter().all(|g| g.condition.is_some()));
    }
}

#[test]
fn single_setting_prediction() {
    let noon = ok(&["state", "--photons", "2", "--noon"], "");
    for phi in [0.0f64, 0.4, 2.5] {
        let out = ok(&["predict", "--setting", &format!("{},{phi}", PI / 4.0)], &noon);
        let Body::Records(r) = body(&out) else { panic!() };
        assert_eq!(r.records.len(), 1);
        assert!((r.records[0].value - (1.0 + (2.0 * phi).cos()) / 2.0).abs() < 1e-12);
    }
    let out = ok(&["--degrees", "predict", "--setting", "45,90"], &noon);
    let Body::Records(r) = body(&out) else { panic!() };
    let s = MeasurementSetting::new(r.records[0].theta, r.records[0].phi);
    assert!(s.approx_eq(&MeasurementSetting::new(PI / 4.0, PI / 2.0), 1e-12));
    assert!(r.records[0].value.abs() < 1e-12);
}

#[test]
fn campaign_then_tomography_on_noon() {
    let noon = ok(&["state", "--photons", "2", "--noon"], "");
    let args = ["campaign", "--order", "2", "--shots", "200000", "--seed", "4"];
    let records = ok(&args, &noon);
    assert_eq!(records, ok(&args, &noon), "campaigns are reproducible");
    let Body::Records(r) = body(&records) else { panic!() };
    let src = r.source.as_ref().unwrap();
    assert_eq!((src.method.as_str(), src.shots, src.seed), ("simulated", Some(200000), Some(4)));
    assert!(r.records.iter().all(|x| x.stderr.is_some()));

    let Body::Density(d) = body(&ok(&["tomography", "--project-psd"], &records)) else { panic!() };
    assert!(d.projected);
    let rho = d.rho().unwrap();
    for (i, j) in [(0, 0), (0, 2), (2, 0), (2, 2)] {
        assert!((rho[(i, j)].re - 0.5).abs() < 0.02, "ρ[{i}{j}] = {}", rho[(i, j)]);
    }
    assert!((d.trace - 1.0).abs() < 1e-12 && d.min_eigenvalue > -1e-12);
}

#[test]
fn files_in_and_out() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    let recs = dir.path().join("recs.json");
    ok(&["state", "--photons", "3", "--mode1", "1", "--out", state.to_str().unwrap()], "");
    ok(&["--in", state.to_str().unwrap(), "predict", "--out", recs.to_str().unwrap()], "");
    let Body::Density(d) = body(&ok(&["tomography", "--records", recs.to_str().unwrap()], "")) else { panic!() };
    let rho = d.rho().unwrap();
    let want = FixedNState::basis(3, 1).unwrap().density();
    assert!((rho - want).iter().all(|z| z.norm() < 1e-9));
    assert!(d.warnings.is_empty() && !d.projected);
}

#[test]
fn stokes_of_a_single_photon() {
    let dir = tempfile::tempdir().unwrap();
    let one = ok(&["state", "--photons", "1", "--mode1", "1"], "");
    let r1 = write(dir.path(), "r1.json", &ok(&["predict"], &one));
    // second-order records of a one-photon state are all zero
    let zero_state = ok(&["state", "--photons", "2", "--mode1", "0"], "");
    let Body::Records(mut r2) = body(&ok(&["predict"], &zero_state)) else { panic!() };
    r2.records.iter_mut().for_each(|r| r.value = 0.0);
    let r2 = write(dir.path(), "r2.json", &Document::new(Body::Records(r2)).to_json());
    let Body::Stokes(s) = body(&ok(&["stokes", "--records1", &r1, "--records2", &r2], "")) else { panic!() };
    let expect = [1.0, 1.0, 0.0, 0.0];
    for (m, e) in s.means.iter().zip(expect) {
        assert!((m - e).abs() < 1e-10);
    }
    let diag = [s.covariance[1][1], s.covariance[2][2], s.covariance[3][3]];
    assert!(diag[0].abs() < 1e-10 && (diag[1] - 1.0).abs() < 1e-10 && (diag[2] - 1.0).abs() < 1e-10);
}

#[test]
fn input_errors_exit_with_two() {
    let o = cli(&["plan", "--order", "0"], "");
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("order"));
    assert_eq!(cli(&["plan", "--bogus"], "").code, EXIT_INPUT);
    assert_eq!(cli(&["reconstruct"], "not json").code, EXIT_INPUT);
    let plan = ok(&["plan", "--order", "2"], "");
    let o = cli(&["reconstruct"], &plan);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("expected a records document"));

    // a record missing from the plan
    let noon = ok(&["state", "--photons", "2", "--noon"], "");
    let Body::Records(mut r) = body(&ok(&["predict"], &noon)) else { panic!() };
    r.records.pop();
    let short = Document::new(Body::Records(r.clone())).to_json();
    let o = cli(&["reconstruct"], &short);
    assert_eq!(o.code, EXIT_INPUT);
    assert!(o.stderr.contains("plan"));
    let o = cli(&["reconstruct", "--order", "3"], &ok(&["predict"], &noon));
    assert_eq!(o.code, EXIT_INPUT);
    assert_eq!(cli(&["state", "--photons", "2", "--mode1", "5"], "").code, EXIT_INPUT);
    assert_eq!(cli(&["campaign", "--shots", "0", "--seed", "1"], &noon).code, EXIT_INPUT);
}

#[test]
fn empty_projection_is_a_numerical_failure() {
    // all-zero records give a zero density with nothing to keep
    let noon = ok(&["state", "--photons", "2", "--noon"], "");
    let Body::Records(mut r) = body(&ok(&["predict"], &noon)) else { panic!() };
    r.records.iter_mut().for_each(|x| x.value = 0.0);
    let zeros = Document::new(Body::Records(r)).to_json();
    let o = cli(&["tomography", "--project-psd"], &zeros);
    assert_eq!(o.code, EXIT_NUMERICAL);
    assert!(o.stderr.contains("warning: normalization"));
}

#[test]
fn help_goes_to_stdout() {
    let o = cli(&["--help"], "");
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("reconstruct") && o.stdout.contains("table1"));
}
