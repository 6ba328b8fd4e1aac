use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use nashpde_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(np_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn builtin_round_trip() {
    let n = np_builtin_count();
    assert!(n >= 12);
    let name = np_builtin_name(0);
    assert!(!name.is_null());
    unsafe { np_string_free(name) };
    assert!(np_builtin_name(n).is_null());

    let mut s = ptr::null_mut();
    let name = CString::new("delay-es").unwrap();
    assert_eq!(unsafe { np_scenario_builtin(name.as_ptr(), &mut s) }, NpStatus::Ok);
    let p = CString::new("t_end").unwrap();
    assert_eq!(unsafe { np_scenario_set(s, p.as_ptr(), 30.0) }, NpStatus::Ok);

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { np_run(s, &mut r) }, NpStatus::Ok);
    let (players, samples) = unsafe { (np_result_players(r), np_result_samples(r)) };
    assert_eq!(players, 1);
    let mut t = vec![0.0; samples];
    let mut th = vec![0.0; samples];
    unsafe {
        assert_eq!(np_result_times(r, t.as_mut_ptr(), t.len()), NpStatus::Ok);
        assert_eq!(np_result_signal(r, 0, NpSignal::Action, th.as_mut_ptr(), th.len()), NpStatus::Ok);
        assert_eq!(np_result_signal(r, 0, NpSignal::Action, th.as_mut_ptr(), 3), NpStatus::OutOfRange);
        assert_eq!(np_result_signal(r, 1, NpSignal::Action, th.as_mut_ptr(), th.len()), NpStatus::OutOfRange);
    }
    assert!(last_error().contains("out of range"));
    assert_eq!(t[0], 0.0);
    assert!(t.windows(2).all(|w| w[1] > w[0]));
    let (mut star, mut tail) = (0.0, 0.0);
    assert_eq!(unsafe { np_result_tail(r, 0, &mut star, &mut tail) }, NpStatus::Ok);
    assert_eq!(star, 1.0);
    assert!(tail < 0.2);
    assert!(!unsafe { np_result_divergence(r, ptr::null_mut()) });

    let dir = tempfile::tempdir().unwrap();
    let d = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(unsafe { np_result_export(s, r, d.as_ptr()) }, NpStatus::Ok);
    assert!(dir.path().join("delay-es.csv").exists());

    let json = unsafe { np_scenario_to_json(s) };
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { np_string_free(json) };
    let c = CString::new(text).unwrap();
    let mut s2 = ptr::null_mut();
    assert_eq!(unsafe { np_scenario_from_json(c.as_ptr(), &mut s2) }, NpStatus::Ok);

    unsafe {
        np_result_free(r);
        np_scenario_free(s);
        np_scenario_free(s2);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut s = ptr::null_mut();
    let bad = CString::new("nope").unwrap();
    assert_eq!(unsafe { np_scenario_builtin(bad.as_ptr(), &mut s) }, NpStatus::Config);
    assert!(last_error().contains("nope"));
    assert!(s.is_null());

    let junk = CString::new("{not json").unwrap();
    assert_eq!(unsafe { np_scenario_from_json(junk.as_ptr(), &mut s) }, NpStatus::Parse);
    assert_eq!(unsafe { np_scenario_builtin(ptr::null(), &mut s) }, NpStatus::NullPointer);
    assert_eq!(unsafe { np_run(ptr::null(), ptr::null_mut()) }, NpStatus::NullPointer);

    let name = CString::new("delay-es").unwrap();
    assert_eq!(unsafe { np_scenario_builtin(name.as_ptr(), &mut s) }, NpStatus::Ok);
    assert_eq!(last_error(), "");
    let p = CString::new("epsilon").unwrap();
    assert_eq!(unsafe { np_scenario_set(s, p.as_ptr(), 0.5) }, NpStatus::Config);
    unsafe {
        np_scenario_free(s);
        np_scenario_free(ptr::null_mut());
        np_result_free(ptr::null_mut());
        np_string_free(ptr::null_mut());
    }
}

#[test]
fn duopoly_nash_through_the_abi() {
    let mut th = [0.0; 2];
    assert_eq!(unsafe { np_duopoly_nash(1.0, th.as_mut_ptr()) }, NpStatus::Ok);
    assert!((th[0] - 130.0 / 3.0).abs() < 1e-9 && (th[1] - 110.0 / 3.0).abs() < 1e-9);
    assert_eq!(unsafe { np_duopoly_nash(2.0, th.as_mut_ptr()) }, NpStatus::Config);
}

#[test]
fn uncompensated_duopoly_is_selectable() {
    let mut s = ptr::null_mut();
    let name = CString::new("duopoly-hetero").unwrap();
    assert_eq!(unsafe { np_scenario_builtin(name.as_ptr(), &mut s) }, NpStatus::Ok);
    assert_eq!(unsafe { np_scenario_set_compensation(s, false) }, NpStatus::Ok);
    let json = unsafe { np_scenario_to_json(s) };
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    unsafe { np_string_free(json) };
    assert!(text.contains("\"compensation\": false"));
    unsafe { np_scenario_free(s) };
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/nashpde.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["np_run", "np_last_error", "np_result_signal", "NP_STATUS_OK"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"nashpde.h\"\nint main(void) { NpScenario *s = 0; NpStatus st = np_scenario_builtin(\"delay-es\", &s); np_scenario_free(s); return st == NP_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let inc = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", inc]).arg(&src).status() {
        Ok(st) => assert!(st.success()),
        Err(_) => eprintln!("no C compiler; header syntax not checked"),
    }
}
