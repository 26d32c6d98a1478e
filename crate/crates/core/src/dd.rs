//! Double-double arithmetic: an f64 pair `hi + lo` carrying about 106 bits.

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

fn split(a: f64) -> (f64, f64) {
    let c = 134_217_729.0 * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    (p, ((ah * bh - p) + ah * bl + al * bh) + al * bl)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }

    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        quick_two_sum(p, e + (self.hi * o.lo + self.lo * o.hi))
    }

    pub fn scale(self, x: f64) -> Dd {
        self.mul(Dd::from_f64(x))
    }

    pub fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let r = self.add(Dd::from_f64(q1).scale(d).neg());
        let q2 = r.hi / d;
        let r = r.add(Dd::from_f64(q2).scale(d).neg());
        let q3 = r.hi / d;
        let q = quick_two_sum(q1, q2);
        q.add(Dd::from_f64(q3))
    }
}

/// `Dd` with the Dekker halves of `hi` precomputed, for repeated products.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Split {
    v: Dd,
    h: f64,
    l: f64,
}

impl Split {
    pub fn new(v: Dd) -> Self {
        let (h, l) = split(v.hi);
        Split { v, h, l }
    }
}

/// `Σ a_i·b_i` as if computed in twice working precision (Ogita, Rump and
/// Oishi's Dot2, extended with the `lo` cross terms).
pub(crate) fn dot2(pairs: impl Iterator<Item = (Split, Split)>) -> Dd {
    let mut s = 0.0;
    let mut c = 0.0;
    for (a, b) in pairs {
        let p = a.v.hi * b.v.hi;
        let pe = ((a.h * b.h - p) + a.h * b.l + a.l * b.h) + a.l * b.l;
        let (t, se) = two_sum(s, p);
        s = t;
        c += pe + se + (a.v.hi * b.v.lo + a.v.lo * b.v.hi);
    }
    quick_two_sum(s, c)
}
