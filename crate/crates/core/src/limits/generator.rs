/// Continuous, compactly supported partition of unity `φ`.
pub trait Generator: Send + Sync {
    /// `r` with `supp φ ⊆ [-r, r]`.
    fn support(&self) -> f64;
    fn eval(&self, x: f64) -> f64;
    /// `max_t Σ_j |φ(t - j)|`.
    fn lebesgue(&self) -> f64;
}

/// The hat function `max(0, 1 - |x|)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Hat;

impl Generator for Hat {
    fn support(&self) -> f64 {
        1.0
    }

    fn eval(&self, x: f64) -> f64 {
        (1.0 - x.abs()).max(0.0)
    }

    fn lebesgue(&self) -> f64 {
        1.0
    }
}

/// Uniform B-spline of the given degree, shifted to `[-degree, 1]`.
///
/// With this shift it is the basic function of the B-spline schemes in the
/// chain indexing used here: degree 2 for Chaikin, 3 for `bspline_tau:0`
/// and 4 for `bspline_tau:0.5`. Degree 1 is the hat function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BSpline {
    degree: usize,
}

impl BSpline {
    pub fn new(degree: usize) -> Option<Self> {
        (degree >= 1).then_some(BSpline { degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// Cardinal B-spline on `[0, k + 1]` by the Cox-de Boor recursion.
fn cardinal(k: usize, x: f64) -> f64 {
    if k == 0 {
        return if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 };
    }
    if x <= 0.0 || x >= (k + 1) as f64 {
        return 0.0;
    }
    let kf = k as f64;
    (x * cardinal(k - 1, x) + (kf + 1.0 - x) * cardinal(k - 1, x - 1.0)) / kf
}

impl Generator for BSpline {
    fn support(&self) -> f64 {
        self.degree as f64
    }

    fn eval(&self, x: f64) -> f64 {
        cardinal(self.degree, x + self.degree as f64)
    }

    fn lebesgue(&self) -> f64 {
        1.0
    }
}
