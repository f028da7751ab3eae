use std::path::Path;
use std::process::Command;

const HEADER: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/include/fockimpl.h");

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(HEADER).unwrap();
    for sym in [
        "typedef struct FockimplMap FockimplMap;",
        "FOCKIMPL_STATUS_BUFFER_TOO_SMALL = 9",
        "fockimpl_map_from_json(",
        "fockimpl_car_family_verify(",
        "fockimpl_ccr_family_new(",
        "fockimpl_dirac_hs(",
        "fockimpl_last_error(",
    ] {
        assert!(text.contains(sym), "missing {sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(out) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(out.status.success());
    let dir = std::env::temp_dir().join(format!("fockimpl-header-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"fockimpl.h\"\n\
         int check(void) {\n\
           FockimplMap *v = NULL;\n\
           FockimplStatus s = fockimpl_example_vphi(0.5, 3, &v);\n\
           fockimpl_map_free(v);\n\
           return s == FOCKIMPL_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let include = Path::new(HEADER).parent().unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
    std::fs::remove_dir_all(&dir).ok();
}
