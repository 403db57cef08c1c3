//! Oriented-rectangle overlap via the separating axis theorem.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedRect<S> {
    pub cx: S,
    pub cy: S,
    pub length: S,
    pub width: S,
    pub heading: S,
}

impl<S: Scalar> OrientedRect<S> {
    pub fn corners(&self) -> [(S, S); 4] {
        let (s, c) = self.heading.sin_cos();
        let hl = self.length / S::lit(2.0);
        let hw = self.width / S::lit(2.0);
        let mut out = [(S::zero(), S::zero()); 4];
        for (k, (dl, dw)) in [(hl, hw), (hl, -hw), (-hl, -hw), (-hl, hw)].into_iter().enumerate() {
            out[k] = (self.cx + dl * c - dw * s, self.cy + dl * s + dw * c);
        }
        out
    }

    fn axes(&self) -> [(S, S); 2] {
        let (s, c) = self.heading.sin_cos();
        [(c, s), (-s, c)]
    }
}

fn project<S: Scalar>(pts: &[(S, S); 4], axis: (S, S)) -> (S, S) {
    pts.iter().fold((S::infinity(), S::neg_infinity()), |(lo, hi), &(x, y)| {
        let d = x * axis.0 + y * axis.1;
        (lo.min(d), hi.max(d))
    })
}

/// True when the two rectangles share interior area. Touching edges do not
/// count. Symmetric in its arguments.
pub fn rects_overlap<S: Scalar>(a: &OrientedRect<S>, b: &OrientedRect<S>) -> bool {
    let ca = a.corners();
    let cb = b.corners();
    let mut axes = [(S::zero(), S::zero()); 4];
    let (aa, ab) = (a.axes(), b.axes());
    // fixed axis order so overlap(a,b) and overlap(b,a) test the same set
    let (first, second) = if (a.heading, a.cx, a.cy) <= (b.heading, b.cx, b.cy) { (aa, ab) } else { (ab, aa) };
    axes[..2].copy_from_slice(&first);
    axes[2..].copy_from_slice(&second);
    axes.iter().all(|&axis| {
        let (alo, ahi) = project(&ca, axis);
        let (blo, bhi) = project(&cb, axis);
        ahi > blo && bhi > alo
    })
}
