import logging
import sys
from typing import Sequence

from src.algebra.lattices import PresetCatalog
from src.core.app import EXIT_INPUT, QcohomApp
from src.core.config import Settings, load_settings
from src.core.registry import Registry


def main(argv: Sequence[str] | None = None) -> int:
    try:
        settings = load_settings()
    except RuntimeError as e:
        print(f"qcohom: {e}", file=sys.stderr)
        return EXIT_INPUT

    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s"
    )

    registry = Registry()
    registry.add(Settings, settings)
    registry.add(PresetCatalog, PresetCatalog(settings.preset_dir, cap=settings.group_cap))

    app = QcohomApp(settings, registry)
    app.load_all_commands("src.modules")
    return app.run(argv)


if __name__ == "__main__":
    sys.exit(main())
