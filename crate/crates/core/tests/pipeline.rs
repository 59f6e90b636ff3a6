mod common;

use std::fs::{self, File};
use std::io::BufReader;

use num_complex::Complex64;

use rtcc::config::RunConfig;
use rtcc::greens::GreensTrajectory;
use rtcc::overlap::read_channel_csv;
use rtcc::qsp::QspErrorReport;
use rtcc::runner::{run, summarize_spectrum};
use rtcc::spectra::{QpFit, SpectralFunction};

use common::siam_toml;

#[test]
fn outputs_are_readable_and_consistent_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "core_index = 1\nmethods = [\"exact\", \"tdcc\", \"tddcc1\", \"tddcc1_1b\", \"qsp\"]\nt_max = 40.0\n\
         emit_components = true\nmax_channels_per_kind = 4\noutput_dir = {:?}\n{}",
        dir.path(),
        siam_toml(2.0)
    );
    let settings = RunConfig::from_toml(&text).unwrap().settings().unwrap();
    let report = run(&settings).unwrap();
    assert_eq!(report.n_failed(), 0);
    assert_eq!(report.methods.len(), 4 + 3);

    for m in &report.methods {
        let open = |suffix: &str| BufReader::new(File::open(dir.path().join(format!("{}_{suffix}", m.method))).unwrap());
        let g = GreensTrajectory::read_csv(open("greens.csv"), &m.method).unwrap();
        assert!(g.g.iter().all(|z| z.is_finite()));
        let a = SpectralFunction::read_csv(open("spectrum.csv"), settings.eta).unwrap();
        let (fit, peaks, integral) = summarize_spectrum(&a).unwrap();
        let qp = m.qp.unwrap();
        assert!((fit.omega0 - qp.omega0).abs() <= 1e-10 && (fit.z - qp.z).abs() <= 1e-10, "{}", m.method);
        assert!((integral - m.spectrum_integral.unwrap()).abs() <= 1e-10);
        assert_eq!(peaks.len(), m.peaks.len());
        for (p, q) in peaks.iter().zip(&m.peaks) {
            assert!((p.omega_hartree - q.omega_hartree).abs() <= 1e-10);
        }
        let json: QpFit = serde_json::from_reader(open("qpfit.json")).unwrap();
        assert!((json.z - qp.z).abs() <= 1e-10);
    }

    let exact = report.method("exact").unwrap().qp.unwrap();
    assert!((exact.omega0 - 0.17).abs() < 0.02);
    assert!(report.method("tdcc").unwrap().completeness_error.is_none());

    for kind in ["tddcc1", "tddcc1_1b"] {
        let err = report.method(kind).unwrap().completeness_error.unwrap();
        assert!(err < 1e-10, "{kind}: {err}");
        let comp = dir.path().join("components").join(kind);
        let manifest: serde_json::Value = serde_json::from_reader(File::open(comp.join("manifest.json")).unwrap()).unwrap();
        let channels = manifest["channels"].as_array().unwrap();
        assert_eq!(channels[0]["kind"], "reference");
        let mut sum: Option<Vec<Complex64>> = None;
        for ch in channels {
            let (grid, o) = read_channel_csv(BufReader::new(File::open(comp.join(ch["overlap"].as_str().unwrap())).unwrap())).unwrap();
            assert_eq!(grid.len(), 401);
            match &mut sum {
                None => sum = Some(o),
                Some(s) => s.iter_mut().zip(&o).for_each(|(a, b)| *a += b),
            }
        }
        // the overlap at t = 0 is the bra-ket of the truncated ground state
        let s0 = sum.unwrap()[0];
        assert!(s0.im.abs() < 1e-12 && (s0.re - 1.0).abs() < 0.2, "{s0}");
        assert!(channels.iter().any(|c| c["kind"] == "hm_single" && c["spectrum"].is_string()));
    }

    let errors: Vec<QspErrorReport> = serde_json::from_str(&fs::read_to_string(dir.path().join("qsp_errors.json")).unwrap()).unwrap_or_else(|e| panic!("{e}"));
    assert_eq!(errors.len(), 3);
    assert!(errors.windows(2).all(|w| w[1].rel_err_g < w[0].rel_err_g));
}
