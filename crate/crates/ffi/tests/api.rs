use std::ffi::{c_char, CStr, CString};
use std::ptr;

use hubo_factor_ffi::*;

fn cs(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Reads a string output, growing the buffer once if needed.
fn read(f: impl Fn(*mut c_char, usize, *mut usize) -> HfStatus) -> Result<String, HfStatus> {
    let mut needed = 0usize;
    let st = f(ptr::null_mut(), 0, &mut needed);
    if st != HfStatus::BufferTooSmall {
        return Err(st);
    }
    let mut buf = vec![0 as c_char; needed];
    let st = f(buf.as_mut_ptr(), buf.len(), ptr::null_mut());
    if st != HfStatus::Ok {
        return Err(st);
    }
    Ok(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_string())
}

fn last_error() -> String {
    read(|b, l, n| unsafe { hf_last_error_message(b, l, n) }).unwrap_or_default()
}

#[test]
fn range_factor_through_handles() {
    unsafe {
        let mut opts = std::mem::zeroed();
        assert_eq!(hf_options_default(&mut opts), HfStatus::Ok);
        opts.method = HfMethod::Range;
        opts.bits = 6;
        let stride = cs("1000000");
        opts.stride = stride.as_ptr();
        let mut report = ptr::null_mut();
        assert_eq!(
            hf_factor(cs("1000070001221").as_ptr(), &opts, &mut report),
            HfStatus::Ok
        );
        assert!(hf_report_found(report));
        let p = read(|b, l, n| hf_report_factor(report, 0, b, l, n)).unwrap();
        let q = read(|b, l, n| hf_report_factor(report, 1, b, l, n)).unwrap();
        assert_eq!((p.as_str(), q.as_str()), ("1000033", "1000037"));
        let e = read(|b, l, n| hf_report_energy_paper(report, b, l, n)).unwrap();
        assert_eq!(e, "-4900170941490841");
        let json = read(|b, l, n| hf_report_to_json(report, b, l, n)).unwrap();
        assert!(json.contains("\"p\": \"1000033\""), "{json}");
        hf_report_free(report);
    }
}

#[test]
fn model_energy_and_json() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(hf_model_build(cs("15").as_ptr(), 3, false, &mut m), HfStatus::Ok);
        assert_eq!(hf_model_num_vars(m), 6);
        assert_eq!(hf_model_degree(m), 4);
        // p = 3 (bits 1,1,0), q = 5 (bits 1,0,1)
        let bits = [1u8, 1, 0, 1, 0, 1];
        let e = read(|b, l, n| hf_model_energy(m, bits.as_ptr(), bits.len(), b, l, n)).unwrap();
        assert_eq!(e, "0");
        let short = [1u8];
        let st = read(|b, l, n| hf_model_energy(m, short.as_ptr(), 1, b, l, n)).unwrap_err();
        assert_eq!(st, HfStatus::InvalidArgument);
        let json = read(|b, l, n| hf_model_to_json(m, b, l, n)).unwrap();
        assert!(json.contains("\"offset\": \"225\""));
        hf_model_free(m);
    }
}

#[test]
fn save_load_round_trip() {
    let dir = std::env::temp_dir().join(format!("hf_ffi_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = cs(dir.join("m.json").to_str().unwrap());
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(hf_model_build(cs("15").as_ptr(), 3, true, &mut m), HfStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(hf_model_quadratize(m, &mut r), HfStatus::Ok);
        assert_eq!(hf_model_save(r, path.as_ptr()), HfStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(hf_model_load(path.as_ptr(), &mut back), HfStatus::Ok);
        assert_eq!(hf_model_num_vars(back), 15);
        assert_eq!(hf_model_ancillas(back), 11);
        assert_eq!(hf_model_num_terms(back), hf_model_num_terms(r));
        for h in [m, r, back] {
            hf_model_free(h);
        }
        let mut none = ptr::null_mut();
        let missing = cs(dir.join("absent.json").to_str().unwrap());
        assert_eq!(hf_model_load(missing.as_ptr(), &mut none), HfStatus::Io);
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn error_codes() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(hf_model_build(ptr::null(), 3, false, &mut m), HfStatus::NullPointer);
        assert_eq!(
            hf_model_build(cs("12x").as_ptr(), 3, false, &mut m),
            HfStatus::InvalidNumber
        );
        assert!(last_error().contains("12x"));
        assert_eq!(
            hf_model_build(cs("3").as_ptr(), 3, false, &mut m),
            HfStatus::InvalidNumber
        );
        assert_eq!(
            hf_model_build(cs("15").as_ptr(), 0, false, &mut m),
            HfStatus::InvalidArgument
        );
        assert!(m.is_null());

        let mut opts = std::mem::zeroed();
        hf_options_default(&mut opts);
        opts.bits = 20;
        let mut rep = ptr::null_mut();
        assert_eq!(
            hf_factor(cs("15").as_ptr(), &opts, &mut rep),
            HfStatus::TooManyVariables
        );
        opts.bits = 2;
        assert_eq!(hf_factor(cs("35").as_ptr(), &opts, &mut rep), HfStatus::Ok);
        assert!(!hf_report_found(rep));
        let st = read(|b, l, n| hf_report_factor(rep, 0, b, l, n)).unwrap_err();
        assert_eq!(st, HfStatus::NotFound);
        hf_report_free(rep);

        opts.workers = 0;
        assert_eq!(hf_factor(cs("15").as_ptr(), &opts, &mut rep), HfStatus::InvalidArgument);
        hf_model_free(ptr::null_mut());
        hf_report_free(ptr::null_mut());
        assert_eq!(hf_model_num_vars(ptr::null()), 0);
        assert!(!CStr::from_ptr(hf_version()).to_str().unwrap().is_empty());
    }
}
