use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let config = cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).unwrap_or_default();
    match cbindgen::Builder::new().with_src(crate_dir.join("src").join("lib.rs")).with_config(config).generate() {
        Ok(bindings) => {
            std::fs::create_dir_all(crate_dir.join("include")).expect("create include dir");
            bindings.write_to_file(crate_dir.join("include").join("ccmax.h"));
        }
        Err(e) => println!("cargo:warning=header not regenerated: {e}"),
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
