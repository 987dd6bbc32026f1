use crate::error::{Error, Result};
use crate::marks::{Mark, MarkKind, MarkStream};
use crate::model::{Configuration, Side};

/// Resolve one mark of the graphical construction in place.
#[inline]
pub fn apply_mark(eta: &mut Configuration, kind: MarkKind) {
    let n = eta.n();
    let sites = |s: Side| match s {
        Side::Left => (0, 1),
        Side::Right => (n - 2, n - 3),
    };
    let occ = eta.raw_mut();
    match kind {
        MarkKind::Exchange(x) => occ.swap(x - 1, x),
        MarkKind::Plus(s) => occ[sites(s).0] = 1,
        MarkKind::Minus(s) => occ[sites(s).0] = 0,
        MarkKind::Copy(s) => {
            let (outer, inner) = sites(s);
            occ[inner] = occ[outer];
        }
        MarkKind::Branch(s) => {
            let (outer, inner) = sites(s);
            occ[inner] |= occ[outer];
        }
    }
}

/// Apply, in order, every mark with time `<= t_end`.
pub fn replay<'a>(eta: &mut Configuration, marks: impl IntoIterator<Item = &'a Mark>, t_end: f64) {
    for m in marks {
        if m.time > t_end {
            break;
        }
        apply_mark(eta, m.kind);
    }
}

/// `η_{t_end}` as a deterministic function of `η_0` and the stream.
pub fn run_graphical(eta0: &Configuration, stream: &MarkStream, t_end: f64) -> Result<Configuration> {
    if t_end > stream.horizon {
        return Err(Error::HorizonExceeded {
            requested: t_end,
            horizon: stream.horizon,
        });
    }
    let mut eta = eta0.clone();
    replay(&mut eta, stream, t_end);
    Ok(eta)
}
