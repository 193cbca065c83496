fn main() -> std::process::ExitCode {
    sphpoly::cli::main()
}
