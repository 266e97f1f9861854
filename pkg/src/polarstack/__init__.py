"""Polar-code decoders: SC, FSSC, SCL, FSSCL and stack search variants."""
