use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use influx::fpe::read_curve;
use influx::plot::{render_svg, Chart, Series};

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn chart() -> Chart {
    let series = ["curve_a.csv", "curve_b.csv"]
        .iter()
        .map(|name| {
            let curve = read_curve(BufReader::new(File::open(data(name)).unwrap())).unwrap();
            Series {
                label: name.trim_end_matches(".csv").to_string(),
                x: curve.times,
                y: curve.sigma,
            }
        })
        .collect();
    Chart {
        title: "golden".into(),
        x_label: "t".into(),
        y_label: "sigma".into(),
        series,
        ..Chart::default()
    }
}

/// Set `INFLUX_BLESS=1` to rewrite the snapshot after an intended change.
#[test]
fn two_curves_match_snapshot() {
    let svg = render_svg(&chart()).unwrap();
    let golden = data("two_curves.svg");
    if std::env::var_os("INFLUX_BLESS").is_some() {
        std::fs::write(&golden, &svg).unwrap();
    }
    assert_eq!(svg, std::fs::read_to_string(&golden).unwrap());
}

#[test]
fn rendering_is_deterministic_and_labelled() {
    let a = render_svg(&chart()).unwrap();
    assert_eq!(a, render_svg(&chart()).unwrap());
    assert_eq!(a.matches("<polyline").count(), 2);
    assert!(a.contains("curve_a") && a.contains("curve_b"));
    assert!(a.contains(">t<") && a.contains(">sigma<"));
}
