import os
from dotenv import load_dotenv

load_dotenv()


def _int_env(name: str, default: int):
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        return raw


class Config:
    # Compiler defaults (overridable per run from the command line)
    STRATEGY = os.getenv("PARITY_FORGE_STRATEGY", "greedy")
    BEAM_WIDTH = _int_env("PARITY_FORGE_BEAM_WIDTH", 4)
    DEPTH = _int_env("PARITY_FORGE_DEPTH", 2)
    MAX_LAYERS = _int_env("PARITY_FORGE_MAX_LAYERS", 200)

    # Internal parallelism, 0 = one worker per CPU
    THREADS = _int_env("PARITY_FORGE_THREADS", 0)

    # Largest layout (in qubits) the exhaustive verifier oracles will enumerate
    EXHAUSTIVE_CAP = _int_env("PARITY_FORGE_EXHAUSTIVE_CAP", 24)

    # Logging
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    @staticmethod
    def threads() -> int:
        """Resolved worker count"""
        if isinstance(Config.THREADS, int) and Config.THREADS > 0:
            return Config.THREADS
        return os.cpu_count() or 1

    @staticmethod
    def validate():
        """Ensure every setting holds a usable value"""
        invalid = []
        if Config.STRATEGY not in ("greedy", "beam"):
            invalid.append("PARITY_FORGE_STRATEGY")
        for name, value, minimum in (
            ("PARITY_FORGE_BEAM_WIDTH", Config.BEAM_WIDTH, 1),
            ("PARITY_FORGE_DEPTH", Config.DEPTH, 1),
            ("PARITY_FORGE_MAX_LAYERS", Config.MAX_LAYERS, 1),
            ("PARITY_FORGE_THREADS", Config.THREADS, 0),
            ("PARITY_FORGE_EXHAUSTIVE_CAP", Config.EXHAUSTIVE_CAP, 1),
        ):
            if not isinstance(value, int) or value < minimum:
                invalid.append(name)
        if Config.LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            invalid.append("LOG_LEVEL")

        if invalid:
            raise EnvironmentError(f"Invalid environment variables: {', '.join(invalid)}")

        return True
