package tests;

public class FilesTest {
    public static boolean plainName() {
        return app.Files.resolve("a.txt").equals("/srv/a.txt");
    }

    public static boolean nested() {
        return app.Files.resolve("docs/b.txt").equals("/srv/docs/b.txt");
    }

    public static boolean noTraversal() {
        return !app.Files.resolve("../etc/passwd").contains("..");
    }
}
