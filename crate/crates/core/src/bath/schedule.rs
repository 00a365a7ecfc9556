//! Piecewise coupling schedules ε(t).

use crate::error::{Error, Result};
use crate::num::{from_usize, lit, to_f64, Real};

/// Shape of a single schedule segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentShape {
    /// Straight line between the end values.
    LinearRamp,
    /// Quintic smootherstep: value, slope and curvature continuous at both ends.
    SmoothRamp,
    /// Constant coupling.
    Plateau,
    /// Instantaneous jump; zero duration.
    Step,
}

impl SegmentShape {
    pub fn name(self) -> &'static str {
        match self {
            SegmentShape::LinearRamp => "linear-ramp",
            SegmentShape::SmoothRamp => "smooth-ramp",
            SegmentShape::Plateau => "plateau",
            SegmentShape::Step => "step",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<T> {
    pub start: T,
    pub end: T,
    pub shape: SegmentShape,
    pub eps_start: T,
    pub eps_end: T,
}

fn smootherstep<T: Real>(x: T) -> T {
    x * x * x * (lit::<T>(10.0) + x * (lit::<T>(-15.0) + lit::<T>(6.0) * x))
}

fn smootherstep_slope<T: Real>(x: T) -> T {
    let y = x * (T::one() - x);
    lit::<T>(30.0) * y * y
}

impl<T: Real> Segment<T> {
    pub fn duration(&self) -> T {
        self.end - self.start
    }

    pub fn is_step(&self) -> bool {
        self.shape == SegmentShape::Step
    }

    fn unit(&self, t: T) -> T {
        let x = (t - self.start) / self.duration();
        x.max(T::zero()).min(T::one())
    }

    /// ε inside the segment. For a step this is the value after the jump.
    pub fn eps_at(&self, t: T) -> T {
        let delta = self.eps_end - self.eps_start;
        match self.shape {
            SegmentShape::Plateau => self.eps_start,
            SegmentShape::Step => self.eps_end,
            SegmentShape::LinearRamp => self.eps_start + delta * self.unit(t),
            SegmentShape::SmoothRamp => self.eps_start + delta * smootherstep(self.unit(t)),
        }
    }

    /// ε̇ inside the segment; a step reports a signed infinity.
    pub fn rate_at(&self, t: T) -> T {
        let delta = self.eps_end - self.eps_start;
        match self.shape {
            SegmentShape::Plateau => T::zero(),
            SegmentShape::Step => {
                if delta < T::zero() {
                    T::neg_infinity()
                } else {
                    T::infinity()
                }
            }
            SegmentShape::LinearRamp => delta / self.duration(),
            SegmentShape::SmoothRamp => delta * smootherstep_slope(self.unit(t)) / self.duration(),
        }
    }

    /// Largest |ε̇| reached in the segment.
    pub fn max_rate(&self) -> T {
        let delta = (self.eps_end - self.eps_start).abs();
        match self.shape {
            SegmentShape::Plateau => T::zero(),
            SegmentShape::Step => T::infinity(),
            SegmentShape::LinearRamp => delta / self.duration(),
            SegmentShape::SmoothRamp => lit::<T>(1.875) * delta / self.duration(),
        }
    }
}

/// Value of the schedule at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSample<T> {
    pub eps: T,
    pub eps_dot: T,
    /// `true` when `t` sits on a step; `eps` is then the right limit.
    pub at_step: bool,
}

/// Time discretization aligned with segment boundaries.
///
/// `segment[i]` is the schedule segment governing `[nodes[i], nodes[i+1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleGrid<T> {
    pub nodes: Vec<T>,
    pub segment: Vec<usize>,
}

impl<T: Real> ScheduleGrid<T> {
    pub fn intervals(&self) -> usize {
        self.segment.len()
    }
}

/// ε(t) as an ordered list of contiguous segments starting at t = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSchedule<T> {
    segments: Vec<Segment<T>>,
}

impl<T: Real> CouplingSchedule<T> {
    pub fn new(segments: Vec<Segment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Schedule("schedule has no segments".into()));
        }
        let tiny = lit::<T>(1e-12);
        let close = |a: T, b: T| (a - b).abs() <= tiny * (T::one() + a.abs().max(b.abs()));
        if segments[0].start != T::zero() {
            return Err(Error::Schedule("first segment must start at t = 0".into()));
        }
        for (i, seg) in segments.iter().enumerate() {
            let ctx = |msg: &str| Error::Schedule(format!("segment {i} ({}): {msg}", seg.shape.name()));
            if !seg.start.is_finite() || !seg.end.is_finite() || !seg.eps_start.is_finite() || !seg.eps_end.is_finite()
            {
                return Err(ctx("non-finite value"));
            }
            if seg.eps_start < T::zero() || seg.eps_end < T::zero() {
                return Err(ctx("coupling must be non-negative"));
            }
            match seg.shape {
                SegmentShape::Step => {
                    if seg.end != seg.start {
                        return Err(ctx("a step has zero duration"));
                    }
                    if seg.eps_start == seg.eps_end {
                        return Err(ctx("a step must change the coupling"));
                    }
                }
                _ => {
                    if !(seg.end > seg.start) {
                        return Err(ctx("duration must be positive"));
                    }
                }
            }
            if seg.shape == SegmentShape::Plateau && !close(seg.eps_start, seg.eps_end) {
                return Err(ctx("plateau must hold a single value"));
            }
            if i > 0 {
                let prev = &segments[i - 1];
                if !close(prev.end, seg.start) {
                    return Err(ctx("segments must be contiguous"));
                }
                if !close(prev.eps_end, seg.eps_start) {
                    return Err(ctx("coupling jumps outside a step segment"));
                }
            }
        }
        Ok(Self { segments })
    }

    /// Builder starting from coupling `eps0` at t = 0.
    pub fn starting_at(eps0: T) -> ScheduleBuilder<T> {
        ScheduleBuilder {
            t: T::zero(),
            eps: eps0,
            segments: Vec::new(),
        }
    }

    /// Constant coupling over `[0, duration]`.
    pub fn constant(eps: T, duration: T) -> Result<Self> {
        Self::starting_at(eps).hold(duration).build()
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    /// Total duration T.
    pub fn duration(&self) -> T {
        self.segments.last().map(|s| s.end).unwrap_or_else(T::zero)
    }

    pub fn has_steps(&self) -> bool {
        self.segments.iter().any(Segment::is_step)
    }

    pub fn max_eps(&self) -> T {
        self.segments
            .iter()
            .fold(T::zero(), |m, s| m.max(s.eps_start).max(s.eps_end))
    }

    pub fn initial_eps(&self) -> T {
        self.segments[0].eps_start
    }

    pub fn final_eps(&self) -> T {
        self.segments[self.segments.len() - 1].eps_end
    }

    /// Index of the segment that governs `t` (right-continuous convention).
    pub fn segment_index(&self, t: T) -> Result<usize> {
        let total = self.duration();
        if !(t >= T::zero() && t <= total) {
            return Err(Error::Domain(format!(
                "t = {} outside schedule [0, {}]",
                to_f64(t),
                to_f64(total)
            )));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.is_step() {
                if t == seg.start {
                    return Ok(i);
                }
            } else if t < seg.end {
                return Ok(i);
            }
        }
        Ok(self.segments.len() - 1)
    }

    /// ε(t) and ε̇(t); on a step returns the right limit and flags it.
    pub fn eval(&self, t: T) -> Result<ScheduleSample<T>> {
        let i = self.segment_index(t)?;
        let seg = &self.segments[i];
        Ok(ScheduleSample {
            eps: seg.eps_at(t),
            eps_dot: seg.rate_at(t),
            at_step: seg.is_step(),
        })
    }

    /// Shorthand for `eval(t)?.eps`, clamping `t` into the schedule.
    pub fn eps(&self, t: T) -> T {
        let t = t.max(T::zero()).min(self.duration());
        self.eval(t).map(|s| s.eps).unwrap_or_else(|_| self.final_eps())
    }

    /// Nodes spaced at most `dt` apart inside each segment, always including
    /// every segment boundary.
    pub fn grid(&self, dt: T) -> Result<ScheduleGrid<T>> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidParameter("time step must be positive".into()));
        }
        let mut nodes = vec![T::zero()];
        let mut segment = Vec::new();
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.is_step() {
                continue;
            }
            let n = (seg.duration() / dt - lit(1e-9)).ceil().to_usize().unwrap_or(1).max(1);
            for j in 1..=n {
                let t = if j == n {
                    seg.end
                } else {
                    seg.start + seg.duration() * from_usize::<T>(j) / from_usize::<T>(n)
                };
                nodes.push(t);
                segment.push(i);
            }
        }
        Ok(ScheduleGrid { nodes, segment })
    }
}

/// Fluent construction of a [`CouplingSchedule`].
#[derive(Debug, Clone)]
pub struct ScheduleBuilder<T> {
    t: T,
    eps: T,
    segments: Vec<Segment<T>>,
}

impl<T: Real> ScheduleBuilder<T> {
    fn push(mut self, shape: SegmentShape, duration: T, to: T) -> Self {
        let seg = Segment {
            start: self.t,
            end: self.t + duration,
            shape,
            eps_start: self.eps,
            eps_end: to,
        };
        self.t = seg.end;
        self.eps = to;
        self.segments.push(seg);
        self
    }

    pub fn linear_ramp(self, duration: T, to: T) -> Self {
        self.push(SegmentShape::LinearRamp, duration, to)
    }

    pub fn smooth_ramp(self, duration: T, to: T) -> Self {
        self.push(SegmentShape::SmoothRamp, duration, to)
    }

    pub fn hold(self, duration: T) -> Self {
        let eps = self.eps;
        self.push(SegmentShape::Plateau, duration, eps)
    }

    pub fn step(self, to: T) -> Self {
        self.push(SegmentShape::Step, T::zero(), to)
    }

    pub fn build(self) -> Result<CouplingSchedule<T>> {
        CouplingSchedule::new(self.segments)
    }
}
