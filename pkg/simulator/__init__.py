"""
IRS secrecy-rate simulator: channel generation, alternating active/passive
beamforming optimization and the Monte-Carlo experiment harness.
"""
