//! C ABI for `fockimpl`.
//!
//! Objects are opaque handles created by `*_new`/`*_from_*` functions and
//! released with the matching `*_free`. Every function returns a
//! [`FockimplStatus`]; on failure a message is available from
//! [`fockimpl_last_error`] on the calling thread. Complex matrices cross
//! the boundary as row-major arrays of interleaved `(re, im)` doubles.
//! Strings returned by the library are freed with [`fockimpl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fockimpl::car::{fock, implementers, structure};
use fockimpl::ccr::{self, fock::CcrRep, implementers as ccr_impl};
use fockimpl::config::{self, Tolerances};
use fockimpl::linalg::{Mat, C64};
use fockimpl::{cli, experiments, io, BogoliubovMap, Error, Kind};

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FockimplStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Structural = 3,
    Precondition = 4,
    Resource = 5,
    Numerical = 6,
    Cutoff = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// Statistics of a Bogoliubov map.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FockimplKind {
    Car = 0,
    Ccr = 1,
}

/// Opaque Bogoliubov map `K(n) -> K(m)`.
pub struct FockimplMap {
    inner: BogoliubovMap,
}

/// Opaque fermionic implementer family `{Ψ_α}`.
pub struct FockimplCarFamily {
    inner: implementers::ImplementerFamily,
}

/// Opaque bosonic implementer family on truncated Fock spaces.
pub struct FockimplCcrFamily {
    inner: ccr_impl::CcrFamily,
    src: CcrRep,
    tgt: CcrRep,
}

/// Residuals of the Cuntz relations of a family.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FockimplCuntzResiduals {
    pub gram: f64,
    pub completeness: f64,
    pub intertwining: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> FockimplStatus {
    match e {
        Error::Structural(_) => FockimplStatus::Structural,
        Error::Precondition(_) => FockimplStatus::Precondition,
        Error::Resource(_) => FockimplStatus::Resource,
        Error::Numerical(_) => FockimplStatus::Numerical,
        Error::Cutoff(_) => FockimplStatus::Cutoff,
        Error::Input(_) | Error::Json(_) => FockimplStatus::InvalidInput,
        Error::Io(_) => FockimplStatus::Io,
    }
}

struct Fail(FockimplStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(FockimplStatus::NullPointer, format!("{what} is null"))
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FockimplStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FockimplStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            FockimplStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn tolerances() -> Result<Tolerances, Fail> {
    Ok(Tolerances::from_env()?)
}

fn to_kind(k: FockimplKind) -> Kind {
    match k {
        FockimplKind::Car => Kind::Car,
        FockimplKind::Ccr => Kind::Ccr,
    }
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(FockimplStatus::InvalidInput, "string contains NUL".into()))
}

fn copy_matrix(a: &Mat, buf: *mut f64, len: usize) -> Result<(), Fail> {
    let need = 2 * a.nrows() * a.ncols();
    if len < need {
        return Err(Fail(
            FockimplStatus::BufferTooSmall,
            format!("buffer holds {len} doubles, {need} needed"),
        ));
    }
    if buf.is_null() {
        return Err(null("buffer"));
    }
    // SAFETY: the caller guarantees `buf` points to `len >= need` doubles.
    let out = unsafe { std::slice::from_raw_parts_mut(buf, need) };
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let z = a[(i, j)];
            let k = 2 * (i * a.ncols() + j);
            out[k] = z.re;
            out[k + 1] = z.im;
        }
    }
    Ok(())
}

/// Human-readable name of a status code (static storage).
#[no_mangle]
pub extern "C" fn fockimpl_status_string(status: FockimplStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        FockimplStatus::Ok => b"ok\0",
        FockimplStatus::NullPointer => b"null pointer\0",
        FockimplStatus::InvalidInput => b"invalid input\0",
        FockimplStatus::Structural => b"structural error\0",
        FockimplStatus::Precondition => b"precondition failed\0",
        FockimplStatus::Resource => b"resource limit exceeded\0",
        FockimplStatus::Numerical => b"numerical validity\0",
        FockimplStatus::Cutoff => b"insufficient cutoff\0",
        FockimplStatus::Io => b"i/o error\0",
        FockimplStatus::BufferTooSmall => b"buffer too small\0",
        FockimplStatus::Panic => b"internal panic\0",
    };
    s.as_ptr() as *const c_char
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL,
/// or 0 when there is no error.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Release a string returned by the library.
///
/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a map from the JSON operator format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_map_from_json(json: *const c_char, out: *mut *mut FockimplMap) -> FockimplStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Fail(FockimplStatus::InvalidInput, "json is not UTF-8".into()))?;
        let v = io::parse_operator(text)?;
        *out = Box::into_raw(Box::new(FockimplMap { inner: v }));
        Ok(())
    })
}

/// Build a map from its full `2m x 2n` matrix (row-major, interleaved).
///
/// # Safety
/// `data` must point to `8 m n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_map_new(
    kind: FockimplKind,
    source_modes: usize,
    target_modes: usize,
    data: *const f64,
    out: *mut *mut FockimplMap,
) -> FockimplStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        if data.is_null() {
            return Err(null("data"));
        }
        let (r, c) = (2 * target_modes, 2 * source_modes);
        let raw = std::slice::from_raw_parts(data, 2 * r * c);
        let a = Mat::from_fn(r, c, |i, j| C64::new(raw[2 * (i * c + j)], raw[2 * (i * c + j) + 1]));
        let v = BogoliubovMap::new(to_kind(kind), source_modes, target_modes, a)?;
        let tol = tolerances()?;
        let report = fockimpl::selfdual::validate(&v, tol.composite)?;
        if !report.pass {
            return Err(Fail(
                FockimplStatus::InvalidInput,
                format!(
                    "not a Bogoliubov isometry (isometry {:.3e}, conjugation {:.3e})",
                    report.isometry_residual, report.conjugation_residual
                ),
            ));
        }
        *out = Box::into_raw(Box::new(FockimplMap { inner: v }));
        Ok(())
    })
}

/// Release a map.
///
/// # Safety
/// `map` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_map_free(map: *mut FockimplMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Mode counts and Fredholm index `2(n - m)`.
///
/// # Safety
/// `map` must be a valid handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_map_shape(
    map: *const FockimplMap,
    source_modes: *mut usize,
    target_modes: *mut usize,
    index: *mut i64,
) -> FockimplStatus {
    guard(|| {
        let v = &deref(map, "map")?.inner;
        *out_ptr(source_modes, "source_modes")? = v.source_modes;
        *out_ptr(target_modes, "target_modes")? = v.target_modes;
        *out_ptr(index, "index")? = v.index_data().ind;
        Ok(())
    })
}

/// Copy the full matrix into `buf` (`len` doubles).
///
/// # Safety
/// `map` must be a valid handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_map_matrix(map: *const FockimplMap, buf: *mut f64, len: usize) -> FockimplStatus {
    guard(|| copy_matrix(&deref(map, "map")?.inner.matrix, buf, len))
}

/// `out = a ∘ b`.
///
/// # Safety
/// `a`, `b` must be valid handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_map_compose(
    a: *const FockimplMap,
    b: *const FockimplMap,
    out: *mut *mut FockimplMap,
) -> FockimplStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let v = deref(a, "a")?.inner.compose(&deref(b, "b")?.inner)?;
        *out = Box::into_raw(Box::new(FockimplMap { inner: v }));
        Ok(())
    })
}

/// Serialize a map in the JSON operator format.
///
/// # Safety
/// `map` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_map_to_json(map: *const FockimplMap, out: *mut *mut c_char) -> FockimplStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        *out = into_c_string(io::operator_to_string(&deref(map, "map")?.inner))?;
        Ok(())
    })
}

/// JSON analysis report (the output of `fockimpl car analyze` or
/// `fockimpl ccr analyze`). `pass` receives 1 when all checks hold.
///
/// # Safety
/// `map` must be a valid handle; `out` and `pass` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_analyze(
    map: *const FockimplMap,
    out: *mut *mut c_char,
    pass: *mut i32,
) -> FockimplStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let pass = out_ptr(pass, "pass")?;
        let v = &deref(map, "map")?.inner;
        let tol = tolerances()?;
        let report = match v.kind {
            Kind::Car => cli::car_analyze(v, &tol)?,
            Kind::Ccr => cli::ccr_analyze(v, &tol)?,
        };
        *pass = report.pass as i32;
        *out = into_c_string(report.json.to_string())?;
        Ok(())
    })
}

/// The character `χ(V) = (-1)^{dim h_V}` of a fermionic map.
///
/// # Safety
/// `map` must be a valid handle; `chi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_car_chi(map: *const FockimplMap, chi: *mut i32) -> FockimplStatus {
    guard(|| {
        let v = &deref(map, "map")?.inner;
        *out_ptr(chi, "chi")? = structure::chi_character(v, tolerances()?.rank)?;
        Ok(())
    })
}

/// Build the fermionic implementer family of `map`.
///
/// # Safety
/// `map` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_car_family_new(
    map: *const FockimplMap,
    out: *mut *mut FockimplCarFamily,
) -> FockimplStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let v = &deref(map, "map")?.inner;
        if v.kind != Kind::Car {
            return Err(Fail(FockimplStatus::InvalidInput, "expected a CAR map".into()));
        }
        let tol = tolerances()?;
        let data = structure::decompose(v, tol.rank)?;
        let rep = fock::build_rep(v.target_modes, Some(config::DEFAULT_CAR_MODE_CAP))?;
        let family = implementers::implementers(v, &data, &rep)?;
        *out = Box::into_raw(Box::new(FockimplCarFamily { inner: family }));
        Ok(())
    })
}

/// Release a fermionic family.
///
/// # Safety
/// `family` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_car_family_free(family: *mut FockimplCarFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Number of members `2^{M_V}`.
///
/// # Safety
/// `family` must be a valid handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_car_family_len(family: *const FockimplCarFamily, len: *mut usize) -> FockimplStatus {
    guard(|| {
        *out_ptr(len, "len")? = deref(family, "family")?.inner.len();
        Ok(())
    })
}

/// Copy member `member` (a `2^m x 2^n` matrix) into `buf`.
///
/// # Safety
/// `family` must be a valid handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_car_family_member(
    family: *const FockimplCarFamily,
    member: usize,
    buf: *mut f64,
    len: usize,
) -> FockimplStatus {
    guard(|| {
        let f = &deref(family, "family")?.inner;
        let psi = f
            .psis
            .get(member)
            .ok_or_else(|| Fail(FockimplStatus::InvalidInput, format!("member {member} out of range")))?;
        copy_matrix(psi, buf, len)
    })
}

/// Residuals of `Ψ_α*Ψ_β = δ_{αβ}`, `Σ Ψ_α Ψ_α* = 1` and intertwining.
///
/// # Safety
/// `family` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_car_family_verify(
    family: *const FockimplCarFamily,
    out: *mut FockimplCuntzResiduals,
) -> FockimplStatus {
    guard(|| {
        let f = &deref(family, "family")?.inner;
        let out = out_ptr(out, "out")?;
        let r = implementers::verify_cuntz(
            f,
            &implementers::default_samples(f.source_modes(), 4),
            tolerances()?.composite,
        );
        *out = FockimplCuntzResiduals {
            gram: r.gram_residual,
            completeness: r.completeness_residual,
            intertwining: r.intertwining_residual,
        };
        Ok(())
    })
}

/// Build the bosonic implementer family at particle cutoff `n_max` with
/// multi-indices of length at most `n_terms`.
///
/// # Safety
/// `map` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_ccr_family_new(
    map: *const FockimplMap,
    n_max: usize,
    n_terms: usize,
    out: *mut *mut FockimplCcrFamily,
) -> FockimplStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let v = &deref(map, "map")?.inner;
        if v.kind != Kind::Ccr {
            return Err(Fail(FockimplStatus::InvalidInput, "expected a CCR map".into()));
        }
        let tol = tolerances()?;
        let data = ccr::structure::decompose_ccr(v, tol.rank)?;
        let cap = Some(config::DEFAULT_CCR_DIM_CAP);
        let src = ccr::fock::build_rep_ccr(v.source_modes, n_max, cap)?;
        let tgt = ccr::fock::build_rep_ccr(v.target_modes, n_max, cap)?;
        let family = ccr_impl::implementers_ccr(v, &data, &src, &tgt, n_terms, tol.composite)?;
        *out = Box::into_raw(Box::new(FockimplCcrFamily { inner: family, src, tgt }));
        Ok(())
    })
}

/// Release a bosonic family.
///
/// # Safety
/// `family` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_ccr_family_free(family: *mut FockimplCcrFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Number of members (multi-indices up to the requested length).
///
/// # Safety
/// `family` must be a valid handle; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_ccr_family_len(family: *const FockimplCcrFamily, len: *mut usize) -> FockimplStatus {
    guard(|| {
        *out_ptr(len, "len")? = deref(family, "family")?.inner.len();
        Ok(())
    })
}

/// Cutoff-aware residuals on source states with at most `probe` particles.
/// Returns `Cutoff` (with the residuals still written) when any exceeds
/// the cutoff tolerance.
///
/// # Safety
/// `family` must be a valid handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_ccr_family_verify(
    family: *const FockimplCcrFamily,
    probe: usize,
    out: *mut FockimplCuntzResiduals,
) -> FockimplStatus {
    guard(|| {
        let f = deref(family, "family")?;
        let out = out_ptr(out, "out")?;
        let samples = implementers::default_samples(f.inner.map.source_modes, 2);
        let r = ccr_impl::verify_ccr_family(&f.inner, &f.src, &f.tgt, probe, &samples)?;
        *out = FockimplCuntzResiduals {
            gram: r.gram_residual,
            completeness: r.completeness_defect,
            intertwining: r.field_intertwining.max(r.weyl_intertwining),
        };
        ccr_impl::certify(&r, tolerances()?.cutoff)?;
        Ok(())
    })
}

/// Squared Hilbert–Schmidt norms of the off-diagonal blocks of the
/// truncated chiral Dirac isometry at Fourier cutoff `n_max`.
///
/// # Safety
/// Output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_dirac_hs(n_max: usize, plus_minus: *mut f64, minus_plus: *mut f64) -> FockimplStatus {
    guard(|| {
        let pm = out_ptr(plus_minus, "plus_minus")?;
        let mp = out_ptr(minus_plus, "minus_plus")?;
        let t = experiments::DiracTruncation::new(n_max)?;
        let level = experiments::dirac_hs_level(&t);
        *pm = level.plus_minus;
        *mp = level.minus_plus;
        Ok(())
    })
}

/// The example map `V(φ): K(k) -> K(k+1)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fockimpl_example_vphi(phi: f64, k: usize, out: *mut *mut FockimplMap) -> FockimplStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let v = experiments::build_example_vphi(phi, k)?;
        *out = Box::into_raw(Box::new(FockimplMap { inner: v }));
        Ok(())
    })
}
