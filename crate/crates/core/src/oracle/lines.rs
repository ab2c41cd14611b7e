use super::OracleError;

/// The line `a·x + b·y = c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LineParams {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, OracleError> {
        if a == 0.0 && b == 0.0 {
            return Err(OracleError::InvalidArgument(
                "line normal (a, b) must be non-zero".into(),
            ));
        }
        Ok(LineParams { a, b, c })
    }

    /// Line through `point` with direction angle `theta` (radians from the x axis).
    pub fn through(point: (f64, f64), theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        let (a, b) = (-sin, cos);
        LineParams {
            a,
            b,
            c: a * point.0 + b * point.1,
        }
    }

    /// Unsigned Euclidean distance from `point` to the line.
    pub fn distance(&self, point: (f64, f64)) -> f64 {
        (self.a * point.0 + self.b * point.1 - self.c).abs() / self.a.hypot(self.b)
    }
}

/// Least-squares intersection of lines via the 2×2 normal equations.
pub fn ls_intersection(lines: &[LineParams]) -> Result<(f64, f64), OracleError> {
    if lines.len() < 2 {
        return Err(OracleError::Degenerate(format!(
            "need at least 2 lines, got {}",
            lines.len()
        )));
    }
    let (mut aa, mut ab, mut bb, mut ac, mut bc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for l in lines {
        aa += l.a * l.a;
        ab += l.a * l.b;
        bb += l.b * l.b;
        ac += l.a * l.c;
        bc += l.b * l.c;
    }
    let det = aa * bb - ab * ab;
    let scale = (aa + bb) * (aa + bb);
    if !(det > 1e-12 * scale) {
        return Err(OracleError::Degenerate(
            "normal matrix is singular (parallel lines)".into(),
        ));
    }
    Ok(((bb * ac - ab * bc) / det, (aa * bc - ab * ac) / det))
}
