fn main() -> std::process::ExitCode {
    cnnga::cli::main()
}
