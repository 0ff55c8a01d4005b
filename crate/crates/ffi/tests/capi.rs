use std::ffi::{c_char, CStr, CString};
use std::process::Command;
use std::ptr;

use cogradio_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        cg_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn reference() -> *mut CgChannels {
    let mut ch = ptr::null_mut();
    assert_eq!(unsafe { cg_channels_reference(&mut ch) }, CgStatus::Ok);
    ch
}

#[test]
fn joint_design_round_trip() {
    let ch = reference();
    let mut d = ptr::null_mut();
    let pp = 10f64.powf(1.7);
    assert_eq!(unsafe { cg_joint_design(ch, pp, 100.0, &mut d) }, CgStatus::Ok);
    let smse = unsafe { cg_design_smse(d) };
    assert!(smse > 0.0 && smse < 1.0, "smse {smse}");
    assert!(unsafe { cg_design_gap(d) }.abs() <= 1e-2);
    assert!(unsafe { cg_design_converged(d) });

    let (mut re, mut im) = ([0.0; 4], [0.0; 4]);
    assert_eq!(unsafe { cg_design_matrix(d, CgMatrix::Feedback, re.as_mut_ptr(), im.as_mut_ptr(), 4) }, CgStatus::Ok);
    // THP feedback is strictly lower triangular.
    assert_eq!((re[0], im[0], re[1], im[1], re[3], im[3]), (0.0, 0.0, 0.0, 0.0, 0.0, 0.0));

    let mut g = ptr::null_mut();
    assert_eq!(unsafe { cg_gzf_design(ch, pp, 100.0, &mut g) }, CgStatus::Ok);
    assert!(unsafe { cg_design_smse(g) } >= smse);
    unsafe {
        cg_design_free(d);
        cg_design_free(g);
        cg_channels_free(ch);
    }
}

#[test]
fn short_buffer_is_reported() {
    let ch = reference();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { cg_gzf_design(ch, 20.0, 10.0, &mut d) }, CgStatus::Ok);
    let (mut re, mut im) = ([0.0; 3], [0.0; 3]);
    assert_eq!(
        unsafe { cg_design_matrix(d, CgMatrix::Relay, re.as_mut_ptr(), im.as_mut_ptr(), 3) },
        CgStatus::BufferTooSmall
    );
    assert!(last_error().contains("need 4"));
    unsafe {
        cg_design_free(d);
        cg_channels_free(ch);
    }
}

#[test]
fn null_and_invalid_inputs() {
    let mut out = 0.0;
    assert_eq!(unsafe { cg_siso_relay_ratio(1.0, 2.0, ptr::null_mut()) }, CgStatus::NullPointer);
    assert_eq!(unsafe { cg_siso_relay_ratio(-1.0, 2.0, &mut out) }, CgStatus::InvalidArgument);
    assert!(!last_error().is_empty());
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { cg_joint_design(ptr::null(), 1.0, 1.0, &mut d) }, CgStatus::NullPointer);
    assert!(d.is_null());
    assert!(unsafe { cg_design_smse(ptr::null()) }.is_nan());
    assert_eq!(unsafe { cg_channels_n_t(ptr::null()) }, 0);
    unsafe {
        cg_design_free(ptr::null_mut());
        cg_channels_free(ptr::null_mut());
    }

    let ch = reference();
    assert_eq!(unsafe { cg_joint_design(ch, 1.0, -5.0, &mut d) }, CgStatus::InvalidArgument);
    unsafe { cg_channels_free(ch) };
}

#[test]
fn channels_from_parts_and_json_agree() {
    let set = cogradio::channel::paper_channels();
    let n = set.n_t;
    let mut re = Vec::new();
    let mut im = Vec::new();
    for h in [&set.h13, &set.h14, &set.h23, &set.h24] {
        for i in 0..n {
            for j in 0..n {
                re.push(h[(i, j)].re);
                im.push(h[(i, j)].im);
            }
        }
    }
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { cg_channels_new(n, re.as_ptr(), im.as_ptr(), &mut a) }, CgStatus::Ok);
    let json = CString::new(set.to_json()).unwrap();
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { cg_channels_from_json(json.as_ptr(), &mut b) }, CgStatus::Ok);

    let (mut ra, mut rb) = (0.0, 0.0);
    unsafe {
        assert_eq!(cg_relay_ratio(a, 50.0, 100.0, &mut ra), CgStatus::Ok);
        assert_eq!(cg_relay_ratio(b, 50.0, 100.0, &mut rb), CgStatus::Ok);
        assert_eq!(cg_channels_n_t(a), 2);
        cg_channels_free(a);
        cg_channels_free(b);
    }
    assert_eq!(ra, rb);
    assert!((0.0..=1.0).contains(&ra));

    let bad = CString::new("{\"n_t\": 2}").unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { cg_channels_from_json(bad.as_ptr(), &mut c) }, CgStatus::InvalidArgument);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(cg_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export_and_parses_as_c() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/include/cogradio.h");
    let header = std::fs::read_to_string(path).unwrap();
    for f in [
        "cg_last_error",
        "cg_version",
        "cg_channels_reference",
        "cg_channels_from_json",
        "cg_channels_new",
        "cg_channels_n_t",
        "cg_channels_free",
        "cg_joint_design",
        "cg_gzf_design",
        "cg_design_smse",
        "cg_design_gap",
        "cg_design_converged",
        "cg_design_matrix",
        "cg_design_free",
        "cg_relay_ratio",
        "cg_siso_relay_ratio",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    // The header must stand alone for a C compiler, when one is present.
    if let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-std=c99", "-x", "c", path]).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
