fn main() -> std::process::ExitCode {
    sc_scaling::cli::main()
}
