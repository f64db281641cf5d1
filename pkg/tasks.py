"""Tasks for use with Invoke.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
  http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""

from invoke import Collection, task as invoke_task


TRUTHY = ("y", "yes", "t", "true", "on", "1")
FALSY = ("n", "no", "f", "false", "off", "0")


def is_truthy(arg):
    """Convert "truthy" strings into Booleans.

    Examples:
        >>> is_truthy('yes')
        True
    Args:
        arg (str): Truthy string (True values are y, yes, t, true, on and 1; false values are n, no,
        f, false, off and 0. Raises ValueError if val is anything else.
    """
    if isinstance(arg, bool):
        return arg
    value = str(arg).lower()
    if value in TRUTHY:
        return True
    if value in FALSY:
        return False
    raise ValueError(f"invalid truth value {arg!r}")


# Use pyinvoke configuration for default values, see http://docs.pyinvoke.org/en/stable/concepts/configuration.html
# Variables may be overwritten in invoke.yml or by the environment variables INVOKE_SOLID_DEWETTING_xxx
namespace = Collection("solid_dewetting")
namespace.configure(
    {
        "solid_dewetting": {
            "project_name": "solid-dewetting",
            "package": "solid_dewetting",
            "output_root": "runs",
            "acceptance": False,
        }
    }
)


def task(function=None, *args, **kwargs):
    """Task decorator to override the default Invoke task decorator and add each task to the invoke namespace."""

    def task_wrapper(function=None):
        """Wrapper around invoke.task to add the task to the namespace as well."""
        if args or kwargs:
            task_func = invoke_task(*args, **kwargs)(function)
        else:
            task_func = invoke_task(function)
        namespace.add_task(task_func)
        return task_func

    if function:
        # The decorator was called with no arguments
        return task_wrapper(function)
    # The decorator was called with arguments
    return task_wrapper


def run_command(context, command, **kwargs):
    """Run a command in the local environment, with the acceptance switch exported when enabled."""
    env = {"SOLID_DEWETTING_OUTPUT_ROOT": context.solid_dewetting.output_root}
    if is_truthy(context.solid_dewetting.acceptance):
        env["SOLID_DEWETTING_ACCEPTANCE"] = "1"
    return context.run(command, env=env, **kwargs)


# ------------------------------------------------------------------------------
# BUILD
# ------------------------------------------------------------------------------
@task
def generate_packages(context):
    """Generate all Python packages and place them under dist/."""
    run_command(context, "poetry build")


# ------------------------------------------------------------------------------
# SIMULATIONS
# ------------------------------------------------------------------------------
@task(
    help={
        "preset": "bundled preset (see 'solid-dewetting presets') or path to a configuration file",
        "parallel": "worker processes for sweeps",
    }
)
def simulate(context, preset="small-island", parallel=1):
    """Run a preset, dispatching sweeps to 'solid-dewetting sweep'."""
    result = run_command(context, f"solid-dewetting run {preset}", warn=True)
    if result.exited == 2:
        # the configuration defines a sweep
        run_command(context, f"solid-dewetting sweep {preset} --parallel {parallel}")


@task
def presets(context):
    """List the bundled presets."""
    run_command(context, "solid-dewetting presets")


# ------------------------------------------------------------------------------
# DOCS
# ------------------------------------------------------------------------------
@task
def docs(context):
    """Serve the documentation locally."""
    run_command(context, "mkdocs serve")


# ------------------------------------------------------------------------------
# TESTS
# ------------------------------------------------------------------------------
@task(
    help={
        "autoformat": "Apply formatting recommendations automatically, rather than failing if formatting is incorrect.",
    }
)
def black(context, autoformat=False):
    """Check Python code style with Black."""
    if autoformat:
        black_command = "black"
    else:
        black_command = "black --check --diff"

    command = f"{black_command} ."

    run_command(context, command)


@task
def flake8(context):
    """Check for PEP8 compliance and other style issues."""
    command = "flake8 solid_dewetting tasks.py --max-line-length 120 --extend-ignore E203,W503"
    run_command(context, command)


@task
def pylint(context):
    """Run pylint code analysis."""
    command = f"pylint --rcfile pyproject.toml {context.solid_dewetting.package}"
    run_command(context, command)


@task
def pydocstyle(context):
    """Run pydocstyle to validate docstring formatting."""
    command = (
        "pydocstyle --convention=pep257 --add-ignore=D100,D104,D105,D107,D202 "
        "--match-dir='^(?!tests).*' solid_dewetting"
    )
    run_command(context, command)


@task
def bandit(context):
    """Run bandit to validate basic static code security analysis."""
    command = "bandit --recursive solid_dewetting --exclude solid_dewetting/tests --skip B101"
    run_command(context, command)


@task
def yamllint(context):
    """Run yamllint on the repository YAML (preset templates are Jinja, not plain YAML)."""
    command = "yamllint mkdocs.yml invoke.example.yml --format standard"
    run_command(context, command)


@task(
    help={
        "label": "specify a module or test case to run instead of the whole suite",
        "failfast": "fail as soon as a single test fails don't run the entire test suite",
        "buffer": "Discard output from passing tests",
    }
)
def unittest(context, label="", failfast=False, buffer=True):
    """Run the unit tests under coverage."""
    if label:
        command = f"coverage run --module unittest {label}"
    else:
        package = context.solid_dewetting.package
        command = f"coverage run --module unittest discover --start-directory {package}/tests --top-level-directory ."

    if failfast:
        command += " --failfast"
    if buffer:
        command += " --buffer"
    run_command(context, command)


@task
def unittest_coverage(context):
    """Report on code test coverage as measured by 'invoke unittest'."""
    command = f"coverage report --skip-covered --include '{context.solid_dewetting.package}/*' --omit '*/tests/*'"

    run_command(context, command)


@task(
    help={
        "failfast": "fail as soon as a single test fails don't run the entire test suite",
    }
)
def tests(context, failfast=False):
    """Run all linters and tests."""
    # Sorted loosely from fastest to slowest
    print("Running black...")
    black(context)
    print("Running flake8...")
    flake8(context)
    print("Running bandit...")
    bandit(context)
    print("Running pydocstyle...")
    pydocstyle(context)
    print("Running yamllint...")
    yamllint(context)
    print("Running pylint...")
    pylint(context)
    print("Running unit tests...")
    unittest(context, failfast=failfast)
    print("All tests have passed!")
    unittest_coverage(context)
