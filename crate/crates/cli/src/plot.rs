use std::fmt::Write;

use stiefel_inj::{inj_upper_bound, CertificateRecord};

fn py_list(xs: impl Iterator<Item = String>) -> String {
    format!("[{}]", xs.collect::<Vec<_>>().join(", "))
}

/// Self-contained matplotlib script: the bound curve over the swept β range,
/// found cells as white dots and capped cells as black dots.
pub fn sweep_script(records: &[CertificateRecord], n: usize, p: usize) -> String {
    let lo = records.iter().map(|r| r.beta).fold(f64::INFINITY, f64::min);
    let hi = records.iter().map(|r| r.beta).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.1, 1.5) };
    let steps = 400;
    let curve: Vec<(f64, f64)> = (0..=steps)
        .filter_map(|k| {
            let b = lo + (hi - lo) * k as f64 / steps as f64;
            inj_upper_bound(b, n, p).ok().map(|r| (b, r.inj_upper))
        })
        .collect();

    let mut s = String::new();
    let _ = writeln!(s, "# Generated by stiefel-inj sweep. Run with: python3 <this file>");
    let _ = writeln!(s, "import matplotlib");
    let _ = writeln!(s, "matplotlib.use(\"Agg\")");
    let _ = writeln!(s, "import matplotlib.pyplot as plt");
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "curve_beta = {}",
        py_list(curve.iter().map(|c| format!("{:?}", c.0)))
    );
    let _ = writeln!(
        s,
        "curve_inj = {}",
        py_list(curve.iter().map(|c| format!("{:?}", c.1)))
    );
    let _ = writeln!(
        s,
        "beta = {}",
        py_list(records.iter().map(|r| format!("{:?}", r.beta)))
    );
    let _ = writeln!(
        s,
        "rho = {}",
        py_list(records.iter().map(|r| format!("{:?}", r.rho)))
    );
    let _ = writeln!(
        s,
        "found = {}",
        py_list(records.iter().map(|r| if r.found { "True" } else { "False" }.to_string()))
    );
    s.push_str(&format!(
        r#"
fig, ax = plt.subplots(figsize=(7, 4.5))
ax.plot(curve_beta, curve_inj, color="0.4", lw=1, label="upper bound")
ax.scatter([b for b, f in zip(beta, found) if f], [r for r, f in zip(rho, found) if f],
           facecolors="white", edgecolors="black", s=18, zorder=3, label="shorter curve found")
ax.scatter([b for b, f in zip(beta, found) if not f], [r for r, f in zip(rho, found) if not f],
           color="black", s=18, zorder=3, label="iteration cap reached")
ax.set_xlabel("beta")
ax.set_ylabel("rho")
ax.set_title("St({n}, {p})")
ax.legend(loc="lower right")
fig.tight_layout()
fig.savefig(__file__.rsplit(".", 1)[0] + ".png", dpi=150)
"#
    ));
    s
}
