"""Default lists of semantically gendered nouns.

These label terms that are gendered by definition, before any
pronoun-based inference runs.  Both lists are lowercase surface forms;
callers may substitute their own lists from a file.
"""

MASCULINE_WORDS = frozenset(
    """
    man men boy boys father fathers son sons brother brothers husband
    husbands uncle uncles nephew nephews emperor emperors king kings
    prince princes duke dukes lord lords knight knights waiter waiters
    actor actors god gods policeman policemen postman postmen hero heros
    heroes wizard wizards steward stewards male males dude dudes guy guys
    boyfriend boyfriends bf bro transmen he
    """.split()
)

FEMININE_WORDS = frozenset(
    """
    woman women girl girls mother mothers daughter daughters sister
    sisters wife wives aunt aunts niece nieces empress empresses queen
    queens princess princesses duchess duchesses lady ladies dame dames
    waitress waitresses actress actresses goddess goddesses policewoman
    policewomen postwoman postwomen heroine heroines witch witches
    stewardess stewardesses female females chick chicks girlfriend
    girlfriends gf gal gals transwomen she
    """.split()
)
