#!/usr/bin/env python3
"""
Test runner for the synchronverter stability toolkit.
Runs the unit, integration, performance and edge-case suites separately.
"""

import sys
import subprocess
import argparse
import time
from pathlib import Path

UNIT_TEST_FILES = [
    "tests/test_model_core.py",
    "tests/test_dynamics.py",
    "tests/test_equilibria.py",
    "tests/test_geometry.py",
    "tests/test_stability.py",
    "tests/test_sweep_manager.py",
    "tests/test_sim.py",
    "tests/test_config.py",
    "tests/test_error_handler.py",
    "tests/test_cli.py",
]


def run_command(cmd, description):
    """Run a command and return success status."""
    print(f"\n{'='*60}")
    print(f"Running: {description}")
    print(f"Command: {' '.join(cmd)}")
    print('='*60)

    start_time = time.time()
    result = subprocess.run(cmd, capture_output=False)
    duration = time.time() - start_time

    print(f"\n{description} completed in {duration:.2f} seconds")
    print(f"{description} {'PASSED' if result.returncode == 0 else 'FAILED'}")
    return result.returncode == 0


def run_suite(files, description, extra_args=()):
    existing_files = [f for f in files if Path(f).exists()]
    if not existing_files:
        print(f"No test files found for {description}")
        return False
    cmd = [sys.executable, "-m", "pytest", *existing_files, "-v", "--tb=short", *extra_args]
    return run_command(cmd, description)


def run_unit_tests():
    return run_suite(UNIT_TEST_FILES, "Unit Tests", ["--durations=10"])


def run_integration_tests():
    return run_suite(["tests/test_integration.py"], "Integration Tests", ["-s"])


def run_performance_tests():
    # -s keeps the timing printouts visible
    return run_suite(["tests/test_performance.py"], "Performance Tests", ["-s"])


def run_edge_case_tests():
    return run_suite(["tests/test_edge_cases.py"], "Edge Case Tests")


def run_coverage():
    """Run tests with coverage reporting (needs pytest-cov)."""
    cmd = [
        sys.executable, "-m", "pytest",
        "--cov=synchronverter",
        "--cov-report=html",
        "--cov-report=term-missing",
        "-v"
    ]
    return run_command(cmd, "Coverage Analysis")


def run_all_tests():
    """Run all test suites."""
    print("Starting full test suite")
    print(f"Python version: {sys.version}")
    print(f"Working directory: {Path.cwd()}")

    test_suites = [
        ("Unit Tests", run_unit_tests),
        ("Integration Tests", run_integration_tests),
        ("Performance Tests", run_performance_tests),
        ("Edge Case Tests", run_edge_case_tests)
    ]

    results = []
    for suite_name, test_func in test_suites:
        try:
            results.append((suite_name, test_func()))
        except Exception as e:
            print(f"Error running {suite_name}: {e}")
            results.append((suite_name, False))

    print(f"\n{'='*60}")
    print("TEST SUMMARY")
    print('='*60)
    for suite_name, success in results:
        print(f"{suite_name:20} {'PASSED' if success else 'FAILED'}")

    passed_suites = sum(1 for _, success in results if success)
    print(f"\nOverall: {passed_suites}/{len(results)} test suites passed")
    return passed_suites == len(results)


def main():
    """Main test runner."""
    parser = argparse.ArgumentParser(description="Run tests for the synchronverter stability toolkit")
    parser.add_argument(
        "test_type",
        nargs="?",
        choices=["unit", "integration", "performance", "edge", "all", "coverage"],
        default="all",
        help="Type of tests to run"
    )
    args = parser.parse_args()

    try:
        subprocess.run([sys.executable, "-m", "pytest", "--version"], capture_output=True, check=True)
    except (subprocess.CalledProcessError, FileNotFoundError):
        print("pytest not found. Please install it with: pip install -r requirements.txt")
        return 1

    runners = {
        "unit": run_unit_tests,
        "integration": run_integration_tests,
        "performance": run_performance_tests,
        "edge": run_edge_case_tests,
        "coverage": run_coverage,
        "all": run_all_tests,
    }
    return 0 if runners[args.test_type]() else 1


if __name__ == "__main__":
    sys.exit(main())
