//! Compiles and runs a small C program against the generated header and the
//! cdylib, proving the ABI end to end.

use std::path::PathBuf;
use std::process::Command;

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "cdcg.h"

int main(void) {
    if (strlen(cdcg_version()) == 0) return 10;

    CdcgWorld *world = cdcg_world_center(10, 10, 2, 3);
    if (!world) return 11;
    if (cdcg_world_agents(world) != 3) return 12;

    unsigned char controls[3];
    double value = 0.0;
    if (cdcg_world_solve_sga(world, controls, &value) != CdcgStatus_Ok) return 13;
    if (value <= 0.0) return 14;

    uint64_t series[4];
    if (cdcg_world_run_episode(world, 1, 3, 20, 16, 7, series) != CdcgStatus_Ok) return 15;
    for (int i = 1; i < 4; i++) {
        if (series[i] < series[i - 1]) return 16;
    }
    cdcg_world_free(world);

    /* Failure path: position outside the grid. */
    int64_t xs[1] = {99}, ys[1] = {0};
    if (cdcg_world_new(5, 5, 1, xs, ys, 1) != NULL) return 17;
    char message[256];
    if (cdcg_last_error_message(message, sizeof message) == 0) return 18;

    double beta = 0.0;
    size_t from[2] = {0, 1}, to[2] = {1, 2};
    if (cdcg_metropolis_beta(3, from, to, 2, &beta) != CdcgStatus_Ok) return 19;
    if (beta < 0.6 || beta > 0.7) return 20;

    printf("ok\n");
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // Test binaries live in target/<profile>/deps; the cdylib sits either
    // there or one level up depending on how the build was invoked.
    let exe = std::env::current_exe().unwrap();
    let deps = exe.parent().unwrap().to_path_buf();
    if deps.join("libcdcg_ffi.so").exists() {
        deps
    } else {
        deps.parent().unwrap().to_path_buf()
    }
}

#[test]
fn c_program_links_and_runs() {
    let target = target_dir();
    let lib = target.join("libcdcg_ffi.so");
    if !lib.exists() {
        panic!("cdylib not found at {}; build the workspace first", lib.display());
    }
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let work = tempfile::tempdir().unwrap();
    let source = work.path().join("smoke.c");
    std::fs::write(&source, C_PROGRAM).unwrap();
    let binary = work.path().join("smoke");

    let compile = Command::new("cc")
        .arg(&source)
        .arg("-I")
        .arg(&include)
        .arg("-L")
        .arg(&target)
        .arg("-lcdcg_ffi")
        .arg("-o")
        .arg(&binary)
        .output()
        .expect("cc is available");
    assert!(
        compile.status.success(),
        "compile failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&binary)
        .env("LD_LIBRARY_PATH", &target)
        .output()
        .expect("smoke binary runs");
    assert!(
        run.status.success(),
        "smoke test exited with {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
