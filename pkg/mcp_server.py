#!/usr/bin/env python3
"""
MCP Server for uplink NOMA BER analysis

This server exposes the scenario presets, the analytical JMLD bound and the
Monte Carlo simulation through the Model Context Protocol (MCP).
"""

import os
import sys

# Add the current directory to Python path to import noma and loop
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from mcp.server.fastmcp import FastMCP

from loop import sampling_loop
from noma import NomaError, bound_curve
from noma.config import PRESETS, RunConfig, load_preset_spec, term_budget
from noma.curve import curve_to_json

# Initialize the MCP server
mcp = FastMCP("noma-ber")

# Keeps tool calls responsive; larger runs belong on the command line
MAX_TOOL_SYMBOLS = 200_000


@mcp.tool()
async def presets() -> str:
    """
    List the built-in scenarios.

    Returns:
        str: One line per preset with user count, antennas, orders and gains
    """
    return "\n".join(
        f"{name}: N={len(spec.orders)} L={spec.antennas} "
        f"M={','.join(map(str, spec.orders))} gains_db={','.join(f'{g:g}' for g in spec.gains_db)}"
        for name, spec in PRESETS.items()
    )


@mcp.tool()
async def bound(preset: str, ebn0: str = "0:40:4") -> str:
    """
    Evaluate the JMLD union bound of every user of a preset.

    Args:
        preset (str): Preset name, e.g. "scenario-2"
        ebn0 (str): Eb/N0 grid as start:stop:step in dB

    Returns:
        str: JSON curve document or an error message
    """
    try:
        config = RunConfig(scenario=load_preset_spec(preset), preset=preset, ebn0=ebn0)
        curve = bound_curve(config.scenario.build(), config.grid, budget=term_budget())
        return curve_to_json(curve)
    except NomaError as e:
        return f"Error evaluating bound: {e.message}"


@mcp.tool()
async def simulate(
    preset: str,
    ebn0: str = "0:12:4",
    detector: str = "jmld",
    seed: int = 0,
    min_errors: int = 100,
    max_symbols: int = 20_000,
) -> str:
    """
    Run a Monte Carlo BER simulation of a preset.

    Args:
        preset (str): Preset name, e.g. "scenario-2"
        ebn0 (str): Eb/N0 grid as start:stop:step in dB
        detector (str): "jmld" or "sicd"
        seed (int): Seed of the random substreams
        min_errors (int): Bit errors per user before a point stops
        max_symbols (int): Symbol cap per point

    Returns:
        str: JSON curve document or an error message
    """
    if max_symbols > MAX_TOOL_SYMBOLS:
        return f"Error simulating: max_symbols is limited to {MAX_TOOL_SYMBOLS} here"
    try:
        config = RunConfig(
            scenario=load_preset_spec(preset),
            preset=preset,
            ebn0=ebn0,
            detector=detector,
            seed=seed,
            min_errors=min_errors,
            max_symbols=max_symbols,
        )
        plan = config.plan()
        curves = await sampling_loop(plan=plan)
        return curve_to_json(curves[plan.detector])
    except (NomaError, ValueError) as e:
        return f"Error simulating: {getattr(e, 'message', str(e))}"


if __name__ == "__main__":
    # Run the MCP server with stdio transport
    mcp.run(transport="stdio")
