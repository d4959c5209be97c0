"""discnn presets: show the named study presets."""

from __future__ import annotations

import click

from discnn.experiments.config import PRESETS


def _show(value: object) -> str:
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


@click.command()
@click.argument("name", required=False)
def presets(name: str | None) -> None:
    """List presets, or show every setting of one preset."""
    if name is None:
        for preset, studies in PRESETS.items():
            click.echo(f"{preset}: {', '.join(studies)}")
        return
    if name not in PRESETS:
        raise click.ClickException(f"Unknown preset {name!r} (have: {', '.join(PRESETS)})")
    for study, values in PRESETS[name].items():
        click.echo(study)
        for key, value in values.items():
            click.echo(f"  {key:<12} {_show(value)}")
