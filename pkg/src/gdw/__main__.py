from gdw.cli import main

main()
