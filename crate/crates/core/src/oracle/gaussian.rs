//! Ordered vertex expectations from explicit displacement operators of a
//! finite set of modes.
//!
//! Each frequency carries two oscillators, a cosine and a sine standing
//! wave, so that `⟨θ(x,t)θ(x′,0)⟩ = Σ_m w_m cos(ω_m (x−x′)/v_b) e^{−iω_m t}`.
//! A vertex operator is then a product of displacements `D(β)` and the
//! vacuum expectation follows from `D(a)D(b) = e^{(ab* − a*b)/2} D(a+b)` and
//! `⟨0|D(γ)|0⟩ = e^{−|γ|²/2}`.

use num_complex::Complex64;

use crate::bath::DiscreteBath;
use crate::error::{Error, Result};
use crate::vertex::VertexProduct;

/// `prefactor · ⟨Π e^{i c θ}⟩` over the modes of `bath`.
pub fn gaussian_oracle_expectation(product: &VertexProduct, bath: &DiscreteBath) -> Result<Complex64> {
    product.validate()?;
    let (net, scale) = product
        .insertions
        .iter()
        .fold((0.0, 0.0), |(n, s), i| (n + i.charge, s + i.charge.abs()));
    if net.abs() > 1e-12 * scale.max(1e-300) {
        return Err(Error::Domain(format!("product has net charge {net}")));
    }
    let mut log = Complex64::new(0.0, 0.0);
    for m in &bath.modes {
        let g = m.weight.sqrt();
        let k = m.omega / bath.v_b;
        for quad in [0, 1] {
            // running displacement and phase of the composed operator
            let mut total = Complex64::new(0.0, 0.0);
            let mut phase = Complex64::new(0.0, 0.0);
            let mut i = 0;
            while i < product.insertions.len() {
                let ord = product.insertions[i].ordinal;
                let mut group = Complex64::new(0.0, 0.0);
                while i < product.insertions.len() && product.insertions[i].ordinal == ord {
                    let ins = &product.insertions[i];
                    let shape = if quad == 0 { (k * ins.point.x).cos() } else { (k * ins.point.x).sin() };
                    group += Complex64::new(0.0, ins.charge * g * shape) * Complex64::from_polar(1.0, m.omega * ins.point.t);
                    i += 1;
                }
                phase += 0.5 * (total * group.conj() - total.conj() * group);
                total += group;
            }
            log += phase - 0.5 * total.norm_sqr();
        }
    }
    Ok(product.prefactor * log.exp())
}
