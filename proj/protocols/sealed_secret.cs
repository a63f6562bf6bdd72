# s only travels under sh(a, b), which the attacker never learns.
X : {a, b, pk(eps)}
s : {a, b, pk(eps), penc([1, n, X], pk(b)), senc([2, s, X], sh(a, b))}
