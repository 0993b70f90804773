package tests;

public class LoginTest {
    public static boolean accepts() {
        return app.Login.login("bob", "hunter2");
    }

    public static boolean rejects() {
        return !app.Login.login("bob", "guess");
    }

    public static boolean userLogged() {
        app.Log.last = "";
        app.Login.login("bob", "guess");
        return app.Log.last.startsWith("user bob;");
    }

    public static boolean secretNotLogged() {
        app.Log.last = "";
        app.Login.login("bob", "hunter2");
        return app.Log.last.equals("user bob;");
    }
}
