use msekit_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn last_error() -> String {
    unsafe { CStr::from_ptr(msekit_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn dirichlet_round_trip_through_handles() {
    unsafe {
        let mut dom = ptr::null_mut();
        assert_eq!(msekit_domain_rectangle(0.0, 0.0, 1.0, 1.0, 8, 8, &mut dom), MsekitStatus::Ok);
        let n = msekit_domain_vertex_count(dom);
        assert_eq!(n, 81);
        let mut xy = vec![0.0; 2 * n];
        assert_eq!(msekit_domain_positions(dom, xy.as_mut_ptr(), xy.len()), MsekitStatus::Ok);
        // planes are minimal, so linear data is reproduced exactly
        let g: Vec<f64> = (0..n).map(|v| 0.3 * xy[2 * v] - 0.7 * xy[2 * v + 1] + 1.0).collect();
        let mut sol = ptr::null_mut();
        assert_eq!(msekit_solve_dirichlet(dom, g.as_ptr(), n, 0.0, &mut sol), MsekitStatus::Ok);
        assert!(msekit_solution_residual(sol) < 1e-9);
        let mut u = vec![0.0; n];
        assert_eq!(msekit_solution_values(sol, u.as_mut_ptr(), n), MsekitStatus::Ok);
        for v in 0..n {
            assert!((u[v] - g[v]).abs() < 1e-9);
        }
        let mut short = vec![0.0; n - 1];
        assert_eq!(msekit_solution_values(sol, short.as_mut_ptr(), n - 1), MsekitStatus::BufferTooSmall);
        assert!(last_error().contains("need"));
        assert_eq!(msekit_domain_is_boundary(dom, 0), 1);
        assert_eq!(msekit_domain_is_boundary(dom, 40), 0);
        msekit_solution_free(sol);
        msekit_domain_free(dom);
    }
}

#[test]
fn errors_come_back_as_codes() {
    unsafe {
        let mut p = ptr::null_mut();
        let bad = CString::new(r#"{"mode":"scherk","solverr":{}}"#).unwrap();
        assert_eq!(msekit_problem_parse(bad.as_ptr(), &mut p), MsekitStatus::Schema);
        assert!(p.is_null());
        assert!(last_error().contains("solverr"));
        assert_eq!(msekit_problem_parse(ptr::null(), &mut p), MsekitStatus::NullPointer);
        let mut dom = ptr::null_mut();
        assert_eq!(msekit_domain_rectangle(0.0, 0.0, 1.0, 1.0, 2, 2, &mut dom), MsekitStatus::Ok);
        let g = [0.0; 3];
        let mut sol = ptr::null_mut();
        assert_eq!(msekit_solve_dirichlet(dom, g.as_ptr(), 3, 0.0, &mut sol), MsekitStatus::InvalidArgument);
        msekit_domain_free(dom);
        // freeing null is a no-op
        msekit_domain_free(ptr::null_mut());
        msekit_report_free(ptr::null_mut());
    }
}

#[test]
fn run_produces_a_report() {
    let tmp = tempfile::tempdir().unwrap();
    unsafe {
        let mut p = ptr::null_mut();
        let spec = CString::new(r#"{"mode":"scherk","side":3.0,"h":0.2}"#).unwrap();
        assert_eq!(msekit_problem_parse(spec.as_ptr(), &mut p), MsekitStatus::Ok);
        let dir = CString::new(tmp.path().to_str().unwrap()).unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(msekit_run(p, dir.as_ptr(), &mut r), MsekitStatus::Ok, "{}", last_error());
        assert_eq!(msekit_report_passed(r), 1);
        let json = CStr::from_ptr(msekit_report_json(r)).to_str().unwrap();
        let v: serde_json::Value = serde_json::from_str(json).unwrap();
        assert_eq!(v["mode"], "scherk");
        assert!(tmp.path().join("report.json").exists());
        msekit_report_free(r);
        msekit_problem_free(p);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/msekit.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["msekit_problem_parse", "msekit_run", "msekit_solve_dirichlet", "MSEKIT_STATUS_SCHEMA"] {
        assert!(text.contains(f), "header lacks {f}");
    }
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"msekit.h\"\nint main(void) { MsekitDomain *d = 0; return msekit_domain_rectangle(0, 0, 1, 1, 2, 2, &d) == MSEKIT_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let Ok(out) = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", concat!(env!("CARGO_MANIFEST_DIR"), "/include")])
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler; skipped the syntax check");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
