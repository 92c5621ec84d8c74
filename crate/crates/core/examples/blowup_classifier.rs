//! Radial averages `r^{2/(p-1)} ū(r)` around a blow-up point: a single
//! bubble has one critical radius, a two-scale tower several.

use std::sync::Arc;

use curvlab::bubbles::{BubbleParams, EuclideanBubble};
use curvlab::identities::{classify_blowup, radial_average, EuclideanField, SumField};

fn main() -> curvlab::Result<()> {
    let n = 5;
    let radii: Vec<f64> = (0..161)
        .map(|k| 1e-4 * 1e4f64.powf(k as f64 / 160.0))
        .collect();
    let bubble = |l: f64| -> curvlab::Result<Arc<dyn EuclideanField>> {
        Ok(Arc::new(EuclideanBubble(BubbleParams::new(
            vec![0.0; n],
            l,
        )?)))
    };
    let cases: Vec<(&str, Arc<dyn EuclideanField>)> = vec![
        ("bubble lambda 20", bubble(20.0)?),
        ("bubble lambda 500", bubble(500.0)?),
        (
            "tower 2 + 200",
            Arc::new(SumField(vec![bubble(2.0)?, bubble(200.0)?])),
        ),
    ];
    for (name, u) in cases {
        let curve = radial_average(u.as_ref(), &vec![0.0; n], &radii, 4)?;
        println!(
            "{name:<18} {:?}, critical radii {:.4?}",
            classify_blowup(&curve, 1.0),
            curve.critical_radii
        );
    }
    Ok(())
}
