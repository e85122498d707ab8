fn main() -> std::process::ExitCode {
    superchat::cli::main()
}
