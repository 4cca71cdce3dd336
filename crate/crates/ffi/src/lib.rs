//! C ABI over `nvlab`.
//!
//! Every function returns an [`NvStatus`]. On failure the message is kept per thread and can be
//! copied out with [`nv_last_error_message`]. Handles are opaque and owned by the caller, who
//! releases them with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nvlab::oscillatory::{eval_integral, BumpProfile, IntegralSpec, Region};
use nvlab::solutions::{mass, SolutionSpec};
use nvlab::solver::{DealiasRule, FieldState, Simulation, StepperConfig};
use nvlab::stationary::stationary_set;
use nvlab::{io, Complex64, NvError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    ResolutionInsufficient = 4,
    Overflow = 5,
    BlowupReached = 6,
    Instability = 7,
    Io = 8,
    Format = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NvRegion {
    Full = 0,
    Inside = 1,
    Outside = 2,
    LargeFreq = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NvFamily {
    Q1ab = 0,
    Q2c = 1,
    Qn0 = 2,
}

/// The six critical points and their distances.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NvStationaryPoints {
    /// Case number 1..4.
    pub case_number: u8,
    pub lambda_re: [f64; 6],
    pub lambda_im: [f64; 6],
    pub omega: f64,
    pub phi: f64,
    pub omega1: f64,
    pub omega2: f64,
}

/// A running simulation.
pub struct NvSimulation {
    sim: Simulation,
}

/// A sampled field `N x N`, row-major.
pub struct NvField {
    state: FieldState,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &NvError) -> NvStatus {
    match e {
        NvError::InvalidArgument(_) => NvStatus::InvalidArgument,
        NvError::Domain(_) => NvStatus::Domain,
        NvError::ResolutionInsufficient(_) => NvStatus::ResolutionInsufficient,
        NvError::Overflow { .. } => NvStatus::Overflow,
        NvError::BlowupReached { .. } => NvStatus::BlowupReached,
        NvError::Instability { .. } => NvStatus::Instability,
        NvError::Io { .. } => NvStatus::Io,
        NvError::Format { .. } => NvStatus::Format,
    }
}

fn guard(f: impl FnOnce() -> Result<(), NvStatus>) -> NvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            NvStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside nvlab".into());
            NvStatus::Panic
        }
    }
}

fn fail(e: NvError) -> NvStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> NvStatus {
    set_error(format!("{what} is NULL"));
    NvStatus::NullPointer
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, NvStatus> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p).to_str().map(Path::new).map_err(|_| fail(NvError::invalid("path is not valid UTF-8")))
}

/// Copies the last error message of this thread, NUL terminated and truncated to `len`.
/// Returns the full message length in bytes, without the terminator.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn nv_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nv_stationary_points(u_re: f64, u_im: f64, out: *mut NvStationaryPoints) -> NvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(u_re.is_finite() && u_im.is_finite()) {
            return Err(fail(NvError::invalid("u must be finite")));
        }
        let s = stationary_set(Complex64::new(u_re, u_im));
        let mut r = NvStationaryPoints {
            case_number: s.case_tag.number(),
            omega: s.omega,
            phi: s.phi,
            omega1: s.omega1,
            omega2: s.omega2,
            ..Default::default()
        };
        for (j, l) in s.lambdas.iter().enumerate() {
            r.lambda_re[j] = l.re;
            r.lambda_im[j] = l.im;
        }
        *out = r;
        Ok(())
    })
}

/// `I(t, u)` over `region`. `cutoff_r` is only read for the large-frequency region.
///
/// # Safety
/// The output pointers must be NULL or valid for writes; all three must be non-NULL.
#[no_mangle]
pub unsafe extern "C" fn nv_integral(
    alpha: f64,
    beta: f64,
    energy: f64,
    u_re: f64,
    u_im: f64,
    t: f64,
    region: NvRegion,
    cutoff_r: f64,
    out_re: *mut f64,
    out_im: *mut f64,
    out_err: *mut f64,
) -> NvStatus {
    guard(|| {
        if out_re.is_null() || out_im.is_null() || out_err.is_null() {
            return Err(null("output pointer"));
        }
        let region = match region {
            NvRegion::Full => Region::Full,
            NvRegion::Inside => Region::InsideB2,
            NvRegion::Outside => Region::OutsideB2,
            NvRegion::LargeFreq => Region::LargeFreq { cutoff_r, profile: BumpProfile::Exp },
        };
        let spec = IntegralSpec { beta, ..IntegralSpec::new(alpha, energy, Complex64::new(u_re, u_im), t, region) };
        let v = eval_integral(&spec).map_err(fail)?;
        *out_re = v.value.re;
        *out_im = v.value.im;
        *out_err = v.apost_err;
        Ok(())
    })
}

fn family_spec(family: NvFamily, p0: f64, p1: f64) -> Result<SolutionSpec, NvStatus> {
    let spec = match family {
        NvFamily::Q1ab => SolutionSpec::Q1ab { a: p0, b: p1 },
        NvFamily::Q2c => SolutionSpec::Q2c { c: p0 },
        NvFamily::Qn0 => {
            if !(p0 >= 1.0 && p0.fract() == 0.0) {
                return Err(fail(NvError::invalid("n must be a positive integer")));
            }
            SolutionSpec::Qn0 { n: p0 as usize }
        }
    };
    spec.validate().map_err(fail)?;
    Ok(spec)
}

/// `int v dx dy` of a closed-form solution. `p0, p1` are `(a, b)`, `(c, _)` or `(n, _)`.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nv_solution_mass(family: NvFamily, p0: f64, p1: f64, t: f64, out: *mut f64) -> NvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = family_spec(family, p0, p1)?;
        *out = mass(&spec, t).map_err(fail)?;
        Ok(())
    })
}

/// A field from `n * n` row-major samples.
///
/// # Safety
/// `values` must point to `n * n` readable doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nv_field_new(
    values: *const f64,
    n: u32,
    half_length: f64,
    energy: f64,
    time: f64,
    out: *mut *mut NvField,
) -> NvStatus {
    guard(|| {
        if values.is_null() || out.is_null() {
            return Err(null("values or out"));
        }
        let n = n as usize;
        let data = std::slice::from_raw_parts(values, n * n).to_vec();
        let state = FieldState::new(data, n, half_length, energy, time).map_err(fail)?;
        *out = Box::into_raw(Box::new(NvField { state }));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nv_field_read_snapshot(path: *const c_char, out: *mut *mut NvField) -> NvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = path_arg(path)?;
        let state = io::read_snapshot(p).map_err(fail)?;
        *out = Box::into_raw(Box::new(NvField { state }));
        Ok(())
    })
}

/// # Safety
/// `field` must come from this library; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nv_field_write_snapshot(field: *const NvField, path: *const c_char) -> NvStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        let p = path_arg(path)?;
        io::write_snapshot(p, &f.state).map_err(fail)
    })
}

/// Grid size `N`, or 0 for NULL.
///
/// # Safety
/// `field` must be NULL or come from this library.
#[no_mangle]
pub unsafe extern "C" fn nv_field_size(field: *const NvField) -> u32 {
    field.as_ref().map(|f| f.state.n as u32).unwrap_or(0)
}

/// Copies the `N * N` samples into `buf`, which holds `len` doubles.
///
/// # Safety
/// `field` must come from this library; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nv_field_values(field: *const NvField, buf: *mut f64, len: usize) -> NvStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < f.state.values.len() {
            return Err(fail(NvError::invalid(format!("buffer holds {len}, need {}", f.state.values.len()))));
        }
        ptr::copy_nonoverlapping(f.state.values.as_ptr(), buf, f.state.values.len());
        Ok(())
    })
}

/// # Safety
/// `field` must be NULL or come from this library, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nv_field_free(field: *mut NvField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Starts a simulation from `field` with step `dt` (2/3 dealiasing, integrating-factor RK4).
///
/// # Safety
/// `field` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nv_simulation_new(
    field: *const NvField,
    dt: f64,
    dealias: bool,
    out: *mut *mut NvSimulation,
) -> NvStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut cfg = StepperConfig::new(dt);
        if !dealias {
            cfg.dealias_rule = DealiasRule::None;
        }
        let sim = Simulation::new(&f.state, cfg).map_err(fail)?;
        *out = Box::into_raw(Box::new(NvSimulation { sim }));
        Ok(())
    })
}

/// Advances `steps` steps.
///
/// # Safety
/// `sim` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn nv_simulation_step(sim: *mut NvSimulation, steps: u32) -> NvStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("simulation"))?;
        for _ in 0..steps {
            s.sim.step().map_err(fail)?;
        }
        Ok(())
    })
}

/// Current time, mass, `L^2` norm and maximum modulus.
///
/// # Safety
/// `sim` must come from this library; `out` must point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nv_simulation_observe(sim: *mut NvSimulation, out: *mut f64) -> NvStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("simulation"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let o = s.sim.observe();
        for (k, v) in [o.time, o.mass, o.l2, o.linf].into_iter().enumerate() {
            *out.add(k) = v;
        }
        Ok(())
    })
}

/// The current state as a new field.
///
/// # Safety
/// `sim` must come from this library; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nv_simulation_state(sim: *mut NvSimulation, out: *mut *mut NvField) -> NvStatus {
    guard(|| {
        let s = sim.as_mut().ok_or_else(|| null("simulation"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(NvField { state: s.sim.state() }));
        Ok(())
    })
}

/// # Safety
/// `sim` must be NULL or come from this library, and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nv_simulation_free(sim: *mut NvSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}
