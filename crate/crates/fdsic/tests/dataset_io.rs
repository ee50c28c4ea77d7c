//! Round-trip and consistency checks for the dataset CSV interchange
//! format, exercised through the public API only.

use fdsic::hwmodel::{
    export_dataset_csv, export_truth_csv, generate_dataset, import_dataset_csv, pa_output,
    DatasetParams, HwDistributionConfig,
};
use fdsic::baseband::OfdmConfig;
use fdsic::C64;

fn small_dataset(noise_db: f64) -> fdsic::hwmodel::Dataset {
    let params = DatasetParams { static_len: 150, dynamic_len: 100, noise_db };
    generate_dataset(21, 0.999, &HwDistributionConfig::default(), &OfdmConfig::default(), &params)
        .unwrap()
}

#[test]
fn exported_samples_reimport_bit_exactly() {
    let ds = small_dataset(-40.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dataset.csv");
    export_dataset_csv(&ds, &path).unwrap();
    let imported = import_dataset_csv(&path).unwrap();
    assert_eq!(imported.x_static, ds.x_static());
    assert_eq!(imported.y_static, ds.y_static());
    assert_eq!(imported.x_dynamic, ds.x_dynamic());
    assert_eq!(imported.y_dynamic, ds.y_dynamic());
}

#[test]
fn noiseless_targets_match_the_truth_trace() {
    let ds = small_dataset(f64::NEG_INFINITY);
    let x = ds.x_full();
    let m_len = ds.truth.initial.taps.memory_len();
    let history = |n: usize| -> Vec<C64> { (0..m_len).map(|m| x[n - m]).collect() };

    // Static period: the frozen initial hardware explains every target.
    for n in [m_len, 80, ds.static_len() - 1] {
        let want = pa_output(&history(n), &ds.truth.initial).unwrap();
        assert_eq!(ds.y_static()[n], want);
    }
    // Dynamic period: the recorded per-sample parameter states explain the
    // targets they were emitted under.
    for t in [0, 57, ds.dynamic_len() - 1] {
        let params = ds.truth.params_at(t).unwrap();
        let n = ds.static_len() + t;
        let want = pa_output(&history(n), &params).unwrap();
        assert_eq!(ds.y_dynamic()[t], want);
    }
}

#[test]
fn truth_trace_rejects_out_of_range_steps() {
    let ds = small_dataset(-40.0);
    assert!(ds.truth.params_at(ds.dynamic_len() - 1).is_ok());
    assert!(ds.truth.params_at(ds.dynamic_len()).is_err());
}

#[test]
fn truth_sidecar_has_one_row_per_parameter_state() {
    let ds = small_dataset(-40.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("truth.csv");
    export_truth_csv(&ds, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param_id,sample_index,re,im"));
    // 11 parameters (2 mixer + 9 taps), recorded once for the static
    // period and once per dynamic sample.
    let expected_rows = 11 * (1 + ds.dynamic_len());
    assert_eq!(lines.count(), expected_rows);
}

#[test]
fn malformed_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &str); 4] = [
        ("bad_header.csv", "index,x_re\n0,1.0\n"),
        ("short_row.csv", "sample_index,period,x_re,x_im,y_re,y_im\n0,static,1.0,2.0\n"),
        ("bad_float.csv", "sample_index,period,x_re,x_im,y_re,y_im\n0,static,one,2.0,3.0,4.0\n"),
        ("bad_period.csv", "sample_index,period,x_re,x_im,y_re,y_im\n0,warmup,1.0,2.0,3.0,4.0\n"),
    ];
    for (name, content) in cases {
        let path = dir.path().join(name);
        std::fs::write(&path, content).unwrap();
        assert!(import_dataset_csv(&path).is_err(), "{name} should be rejected");
    }
    assert!(import_dataset_csv(&dir.path().join("does_not_exist.csv")).is_err());
}
