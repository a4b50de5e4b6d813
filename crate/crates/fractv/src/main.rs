fn main() {
    std::process::exit(fractv::workbench::cli_main());
}
