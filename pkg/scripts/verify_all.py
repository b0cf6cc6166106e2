#!/usr/bin/env python3
"""
Verification Battery Script

Runs every dimension, duality, psi and homotopy check of the engine and writes
the report to reports/verify_all.<format>. Suitable for a nightly CI job.
"""

import logging
import sys
import os
from pathlib import Path

# Add backend directory to path for imports
sys.path.append(os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'backend'))

from core.battery import verify_all
from core.config import get_settings
from core.reports import render, write_report
from core.result_store import ResultStore

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s',
    handlers=[
        logging.StreamHandler(sys.stdout),
        logging.FileHandler('logs/verify_all.log', mode='a') if os.path.exists('logs') else logging.StreamHandler(sys.stdout)
    ]
)
logger = logging.getLogger(__name__)


class BatteryRunner:
    def __init__(self, quick: bool = False, report_dir: str = 'reports'):
        self.settings = get_settings()
        self.store = ResultStore.from_settings(self.settings)
        self.quick = quick
        self.report_dir = Path(report_dir)

    def run(self) -> bool:
        logger.info(f"🚀 Starting verification battery ({self.settings.max_threads} threads)")
        report = verify_all(self.settings, self.store, quick=self.quick)

        failed = [v for v in report.verdicts if not v.ok]
        logger.info(f"📊 Battery completed:")
        logger.info(f"   • Checks run: {len(report.verdicts)}")
        logger.info(f"   • Passed: {len(report.verdicts) - len(failed)}")
        for verdict in failed:
            logger.warning(f"❌ {verdict.name}: {verdict.detail}")

        for fmt in ('json', 'text'):
            write_report(render(report, fmt), str(self.report_dir / f"verify_all.{fmt}"))
        return report.ok


def main():
    """Main entry point"""
    runner = BatteryRunner(quick='--quick' in sys.argv[1:])

    try:
        if runner.run():
            logger.info("✅ All checks passed")
            sys.exit(0)
        else:
            logger.info("⚠️ Some checks failed")
            sys.exit(1)

    except Exception as e:
        logger.error(f"❌ Battery failed: {str(e)}")
        sys.exit(2)


if __name__ == "__main__":
    main()
